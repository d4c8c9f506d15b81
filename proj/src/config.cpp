#include "lprnn/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace lprnn {

using nlohmann::json;

const char* experiment_kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Addition: return "addition";
        case ExperimentKind::Copy: return "copy";
        case ExperimentKind::EsnPattern: return "esn-pattern";
        case ExperimentKind::MapSnn: return "map-snn";
        case ExperimentKind::AnalyzeEigen: return "analyze-eigen";
        case ExperimentKind::Gradcheck: return "gradcheck";
    }
    return "?";
}

namespace {

ExperimentKind experiment_kind_from_name(const std::string& name) {
    for (const ExperimentKind k :
         {ExperimentKind::Addition, ExperimentKind::Copy, ExperimentKind::EsnPattern,
          ExperimentKind::MapSnn, ExperimentKind::AnalyzeEigen, ExperimentKind::Gradcheck})
        if (name == experiment_kind_name(k)) return k;
    throw ConfigError("unknown experiment: " + name);
}

const char* cell_kind_name(CellKind k) {
    switch (k) {
        case CellKind::SimpleRnn: return "simple_rnn";
        case CellKind::LpRnn: return "lprnn";
        case CellKind::Lstm: return "lstm";
        case CellKind::LpLstm: return "lplstm";
    }
    return "?";
}

CellKind cell_kind_from_name(const std::string& name) {
    for (const CellKind k :
         {CellKind::SimpleRnn, CellKind::LpRnn, CellKind::Lstm, CellKind::LpLstm})
        if (name == cell_kind_name(k)) return k;
    throw ConfigError("model.cell: unknown cell kind: " + name);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) known = true;
        if (!known) throw ConfigError(path + ": unknown key \"" + key + "\"");
    }
}

double get_number(const json& obj, const std::string& path, const char* key, double def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return v.get<double>();
}

std::size_t get_count(const json& obj, const std::string& path, const char* key,
                      std::size_t def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned())
        throw ConfigError(path + "." + key + ": expected a non-negative integer");
    return v.get<std::size_t>();
}

std::uint64_t get_u64(const json& obj, const std::string& path, const char* key,
                      std::uint64_t def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned())
        throw ConfigError(path + "." + key + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const char* key,
                       const std::string& def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> get_number_array(const json& obj, const std::string& path, const char* key,
                                     std::vector<double> def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_array()) throw ConfigError(path + "." + key + ": expected an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
        if (!e.is_number()) throw ConfigError(path + "." + key + ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

Activation get_activation(const json& obj, const std::string& path, const char* key,
                          Activation def) {
    const std::string name = get_string(obj, path, key, activation_name(def));
    try {
        return activation_from_name(name);
    } catch (const DomainError&) {
        throw ConfigError(path + "." + key + ": unknown activation \"" + name + "\"");
    }
}

AlphaConfig parse_alpha(const json& obj, const std::string& path, const AlphaConfig& defaults) {
    AlphaConfig cfg = defaults;
    if (!obj.contains("alpha")) return cfg;
    const json& a = obj.at("alpha");
    const std::string p = path + ".alpha";
    check_keys(a, p, {"mode", "tau_min", "tau_max", "value"});
    const std::string mode = get_string(a, p, "mode", "log_uniform_tau");
    if (mode == "log_uniform_tau")
        cfg.mode = AlphaConfig::Mode::LogUniformTau;
    else if (mode == "constant")
        cfg.mode = AlphaConfig::Mode::Constant;
    else
        throw ConfigError(p + ".mode: unknown mode \"" + mode + "\"");
    cfg.tau_min = get_number(a, p, "tau_min", cfg.tau_min);
    cfg.tau_max = get_number(a, p, "tau_max", cfg.tau_max);
    cfg.value = get_number(a, p, "value", cfg.value);
    if (cfg.mode == AlphaConfig::Mode::LogUniformTau &&
        !(cfg.tau_min >= 1.0 && cfg.tau_max >= cfg.tau_min))
        throw ConfigError(p + ": need 1 <= tau_min <= tau_max");
    if (cfg.mode == AlphaConfig::Mode::Constant && !(cfg.value >= 0.0 && cfg.value <= 1.0))
        throw ConfigError(p + ".value: alpha must lie in [0,1]");
    return cfg;
}

bool lstm_family(CellKind k) { return k == CellKind::Lstm || k == CellKind::LpLstm; }

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, "config",
               {"experiment", "seed", "output_dir", "checkpoint", "model", "optimizer",
                "curriculum", "task", "snn", "readout", "eigen", "gradcheck"});
    if (!root.contains("experiment")) throw ConfigError("config.experiment is required");

    ExperimentConfig cfg;
    cfg.experiment = experiment_kind_from_name(get_string(root, "config", "experiment", ""));
    cfg.seed = get_u64(root, "config", "seed", 42);
    cfg.output_dir = get_string(root, "config", "output_dir",
                                std::string("runs/") + experiment_kind_name(cfg.experiment));
    cfg.checkpoint = get_string(root, "config", "checkpoint", "");

    const bool esn_like = cfg.experiment == ExperimentKind::EsnPattern ||
                          cfg.experiment == ExperimentKind::MapSnn;

    // ---- model ----
    const json model_obj = root.contains("model") ? root.at("model") : json::object();
    check_keys(model_obj, "model",
               {"cell", "hidden", "activation", "state_activation", "output_activation", "alpha",
                "rho_target", "input_scale"});
    cfg.model.cell = cfg.experiment == ExperimentKind::Copy ? CellKind::LpLstm : CellKind::LpRnn;
    if (model_obj.contains("cell"))
        cfg.model.cell = cell_kind_from_name(get_string(model_obj, "model", "cell", ""));
    if (cfg.experiment == ExperimentKind::Addition && lstm_family(cfg.model.cell))
        throw ConfigError("model.cell: the addition experiment drives the lprnn family");
    if (cfg.experiment == ExperimentKind::Copy && !lstm_family(cfg.model.cell))
        throw ConfigError("model.cell: the copy experiment drives the lstm family");

    std::size_t hidden_default = 128;
    if (cfg.experiment == ExperimentKind::Copy) hidden_default = 64;
    if (esn_like) hidden_default = 50;
    cfg.model.hidden = get_count(model_obj, "model", "hidden", hidden_default);
    if (cfg.model.hidden < 1) throw ConfigError("model.hidden: need at least one unit");

    cfg.model.activation = get_activation(model_obj, "model", "activation",
                                          esn_like ? Activation::Tanh : Activation::Relu);
    cfg.model.state_activation =
        get_activation(model_obj, "model", "state_activation", Activation::Tanh);
    cfg.model.output_activation =
        get_activation(model_obj, "model", "output_activation", Activation::Tanh);

    // The map-snn demo runs slower units and a weaker input than the plain ESN
    // demo, keeping every activation inside the encodable range of the
    // smallest sweep theta (|value| < theta * oversampling).
    AlphaConfig alpha_default;
    if (cfg.experiment == ExperimentKind::EsnPattern) {
        alpha_default.tau_min = 5.0;
        alpha_default.tau_max = 50.0;
    } else if (cfg.experiment == ExperimentKind::MapSnn) {
        alpha_default.tau_min = 10.0;
        alpha_default.tau_max = 100.0;
    }
    const bool alpha_fixed_zero =
        cfg.model.cell == CellKind::SimpleRnn || cfg.model.cell == CellKind::Lstm;
    if (alpha_fixed_zero && model_obj.contains("alpha"))
        throw ConfigError("model.alpha: fixed at 0 for simple_rnn and lstm cells");
    if (alpha_fixed_zero) {
        cfg.model.alpha.mode = AlphaConfig::Mode::Constant;
        cfg.model.alpha.value = 0.0;
    } else {
        cfg.model.alpha = parse_alpha(model_obj, "model", alpha_default);
    }
    cfg.model.rho_target = get_number(model_obj, "model", "rho_target", 0.95);
    if (!(cfg.model.rho_target > 0.0 && cfg.model.rho_target <= 1.0))
        throw ConfigError("model.rho_target: must lie in (0,1]");
    double input_scale_default = 1.0;
    if (cfg.experiment == ExperimentKind::EsnPattern) input_scale_default = 0.5;
    if (cfg.experiment == ExperimentKind::MapSnn) input_scale_default = 0.05;
    cfg.model.input_scale = get_number(model_obj, "model", "input_scale", input_scale_default);
    if (!(cfg.model.input_scale > 0.0)) throw ConfigError("model.input_scale: must be > 0");

    // ---- optimizer ----
    const json opt_obj = root.contains("optimizer") ? root.at("optimizer") : json::object();
    check_keys(opt_obj, "optimizer",
               {"kind", "learning_rate", "beta1", "beta2", "epsilon", "clip_norm"});
    const std::string opt_kind = get_string(opt_obj, "optimizer", "kind", "sgd");
    if (opt_kind == "sgd")
        cfg.optimizer.kind = OptimizerConfig::Kind::Sgd;
    else if (opt_kind == "adam")
        cfg.optimizer.kind = OptimizerConfig::Kind::Adam;
    else
        throw ConfigError("optimizer.kind: unknown kind \"" + opt_kind + "\"");
    double lr_default = lstm_family(cfg.model.cell) ? 0.005 : 0.01;
    if (cfg.optimizer.kind == OptimizerConfig::Kind::Adam) lr_default = 0.001;
    cfg.optimizer.learning_rate = get_number(opt_obj, "optimizer", "learning_rate", lr_default);
    cfg.optimizer.beta1 = get_number(opt_obj, "optimizer", "beta1", 0.9);
    cfg.optimizer.beta2 = get_number(opt_obj, "optimizer", "beta2", 0.999);
    cfg.optimizer.epsilon = get_number(opt_obj, "optimizer", "epsilon", 1e-8);
    cfg.optimizer.clip_norm = get_number(opt_obj, "optimizer", "clip_norm",
                                         lstm_family(cfg.model.cell) ? 1.0 : 1000.0);
    cfg.optimizer.validate();

    // ---- curriculum ----
    const json cur_obj = root.contains("curriculum") ? root.at("curriculum") : json::object();
    check_keys(cur_obj, "curriculum",
               {"initial_length", "advance_threshold", "growth", "growth_rate", "growth_step",
                "train_samples_per_stage", "test_samples_per_stage", "max_length",
                "max_epochs_per_stage", "batch_size"});
    const bool copy_task = cfg.experiment == ExperimentKind::Copy;
    cfg.curriculum.advance_metric = copy_task ? CurriculumConfig::Metric::CategoricalAccuracy
                                              : CurriculumConfig::Metric::Mse;
    cfg.curriculum.initial_length =
        get_count(cur_obj, "curriculum", "initial_length", copy_task ? 3 : 10);
    cfg.curriculum.advance_threshold =
        get_number(cur_obj, "curriculum", "advance_threshold", copy_task ? 0.99 : 0.001);
    const std::string growth = get_string(cur_obj, "curriculum", "growth", "multiplicative");
    if (growth == "multiplicative")
        cfg.curriculum.growth = CurriculumConfig::Growth::Multiplicative;
    else if (growth == "additive")
        cfg.curriculum.growth = CurriculumConfig::Growth::Additive;
    else
        throw ConfigError("curriculum.growth: unknown rule \"" + growth + "\"");
    cfg.curriculum.growth_rate = get_number(cur_obj, "curriculum", "growth_rate", 1.5);
    cfg.curriculum.growth_step = get_count(cur_obj, "curriculum", "growth_step", 10);
    cfg.curriculum.train_samples_per_stage =
        get_count(cur_obj, "curriculum", "train_samples_per_stage", 10000);
    cfg.curriculum.test_samples_per_stage =
        get_count(cur_obj, "curriculum", "test_samples_per_stage", 1000);
    cfg.curriculum.max_length = get_count(cur_obj, "curriculum", "max_length", copy_task ? 50 : 120);
    cfg.curriculum.max_epochs_per_stage =
        get_count(cur_obj, "curriculum", "max_epochs_per_stage", 40);
    cfg.curriculum.batch_size = get_count(cur_obj, "curriculum", "batch_size", 32);
    cfg.curriculum.validate();

    // ---- task ----
    const json task_obj = root.contains("task") ? root.at("task") : json::object();
    check_keys(task_obj, "task", {"marker_count", "k", "s_max", "esn_steps"});
    cfg.task.marker_count = get_count(task_obj, "task", "marker_count", 2);
    if (cfg.task.marker_count < 2) throw ConfigError("task.marker_count: need at least 2");
    cfg.task.k = get_count(task_obj, "task", "k", 8);
    if (cfg.task.k < 2) throw ConfigError("task.k: need at least 2 data symbols");
    cfg.task.s_max = get_count(task_obj, "task", "s_max", 5);
    if (cfg.task.s_max < 1) throw ConfigError("task.s_max: must be >= 1");
    cfg.task.esn_steps = get_count(task_obj, "task", "esn_steps", 4000);
    if (cfg.task.esn_steps < 200) throw ConfigError("task.esn_steps: need at least 200 steps");

    // ---- snn ----
    const json snn_obj = root.contains("snn") ? root.at("snn") : json::object();
    check_keys(snn_obj, "snn", {"theta", "oversampling", "bipolar", "theta_sweep", "alpha_smooth"});
    cfg.snn.theta = get_number(snn_obj, "snn", "theta", 0.01);
    if (!(cfg.snn.theta > 0.0)) throw ConfigError("snn.theta: must be > 0");
    cfg.snn.oversampling = get_count(snn_obj, "snn", "oversampling", 64);
    if (cfg.snn.oversampling < 1) throw ConfigError("snn.oversampling: must be >= 1");
    cfg.snn.bipolar = get_bool(snn_obj, "snn", "bipolar", true);
    cfg.snn.theta_sweep = get_number_array(snn_obj, "snn", "theta_sweep", cfg.snn.theta_sweep);
    for (const double t : cfg.snn.theta_sweep)
        if (!(t > 0.0)) throw ConfigError("snn.theta_sweep: thetas must be > 0");
    cfg.snn.alpha_smooth = get_number(snn_obj, "snn", "alpha_smooth", 0.9);
    if (!(cfg.snn.alpha_smooth >= 0.0 && cfg.snn.alpha_smooth < 1.0))
        throw ConfigError("snn.alpha_smooth: must lie in [0,1)");

    // ---- readout ----
    const json ro_obj = root.contains("readout") ? root.at("readout") : json::object();
    check_keys(ro_obj, "readout",
               {"method", "ridge_lambda", "sgd_epochs", "sgd_learning_rate", "washout"});
    const std::string method = get_string(ro_obj, "readout", "method", "ridge");
    if (method == "ridge")
        cfg.readout.method = ReadoutMethod::Kind::Ridge;
    else if (method == "sgd")
        cfg.readout.method = ReadoutMethod::Kind::Sgd;
    else
        throw ConfigError("readout.method: unknown method \"" + method + "\"");
    // Stiffer default ridge for map-snn: small readout weights keep the
    // decoder's quantization ripple from being amplified through the readout.
    const double lambda_default = cfg.experiment == ExperimentKind::MapSnn ? 0.1 : 1e-4;
    cfg.readout.ridge_lambda = get_number(ro_obj, "readout", "ridge_lambda", lambda_default);
    if (!(cfg.readout.ridge_lambda >= 0.0)) throw ConfigError("readout.ridge_lambda: must be >= 0");
    cfg.readout.sgd_epochs = get_count(ro_obj, "readout", "sgd_epochs", 20);
    cfg.readout.sgd_learning_rate = get_number(ro_obj, "readout", "sgd_learning_rate", 0.05);
    if (!(cfg.readout.sgd_learning_rate > 0.0))
        throw ConfigError("readout.sgd_learning_rate: must be > 0");
    cfg.readout.washout = get_count(ro_obj, "readout", "washout", 100);

    // ---- eigen ----
    const json eig_obj = root.contains("eigen") ? root.at("eigen") : json::object();
    check_keys(eig_obj, "eigen", {"n", "seeds", "alphas"});
    cfg.eigen.n = get_count(eig_obj, "eigen", "n", 20);
    if (cfg.eigen.n < 1) throw ConfigError("eigen.n: must be >= 1");
    cfg.eigen.seeds = get_count(eig_obj, "eigen", "seeds", 100);
    if (cfg.eigen.seeds < 1) throw ConfigError("eigen.seeds: must be >= 1");
    cfg.eigen.alphas = get_number_array(eig_obj, "eigen", "alphas", cfg.eigen.alphas);
    for (const double a : cfg.eigen.alphas)
        if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("eigen.alphas: must lie in [0,1]");

    // ---- gradcheck ----
    const json gc_obj = root.contains("gradcheck") ? root.at("gradcheck") : json::object();
    check_keys(gc_obj, "gradcheck", {"epsilon"});
    cfg.gradcheck.epsilon = get_number(gc_obj, "gradcheck", "epsilon", 1e-5);
    if (!(cfg.gradcheck.epsilon > 0.0 && cfg.gradcheck.epsilon <= 1e-3))
        throw ConfigError("gradcheck.epsilon: must lie in (0, 1e-3]");

    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

std::string resolved_config_json(const ExperimentConfig& cfg) {
    json root;
    root["experiment"] = experiment_kind_name(cfg.experiment);
    root["seed"] = cfg.seed;
    root["output_dir"] = cfg.output_dir;
    if (!cfg.checkpoint.empty()) root["checkpoint"] = cfg.checkpoint;

    json model;
    model["cell"] = cell_kind_name(cfg.model.cell);
    model["hidden"] = cfg.model.hidden;
    model["activation"] = activation_name(cfg.model.activation);
    model["state_activation"] = activation_name(cfg.model.state_activation);
    model["output_activation"] = activation_name(cfg.model.output_activation);
    json alpha;
    alpha["mode"] =
        cfg.model.alpha.mode == AlphaConfig::Mode::Constant ? "constant" : "log_uniform_tau";
    alpha["tau_min"] = cfg.model.alpha.tau_min;
    alpha["tau_max"] = cfg.model.alpha.tau_max;
    alpha["value"] = cfg.model.alpha.value;
    model["alpha"] = alpha;
    model["rho_target"] = cfg.model.rho_target;
    model["input_scale"] = cfg.model.input_scale;
    root["model"] = model;

    json opt;
    opt["kind"] = cfg.optimizer.kind == OptimizerConfig::Kind::Sgd ? "sgd" : "adam";
    opt["learning_rate"] = cfg.optimizer.learning_rate;
    opt["beta1"] = cfg.optimizer.beta1;
    opt["beta2"] = cfg.optimizer.beta2;
    opt["epsilon"] = cfg.optimizer.epsilon;
    opt["clip_norm"] = cfg.optimizer.clip_norm;
    root["optimizer"] = opt;

    json cur;
    cur["initial_length"] = cfg.curriculum.initial_length;
    cur["advance_threshold"] = cfg.curriculum.advance_threshold;
    cur["growth"] = cfg.curriculum.growth == CurriculumConfig::Growth::Multiplicative
                        ? "multiplicative"
                        : "additive";
    cur["growth_rate"] = cfg.curriculum.growth_rate;
    cur["growth_step"] = cfg.curriculum.growth_step;
    cur["train_samples_per_stage"] = cfg.curriculum.train_samples_per_stage;
    cur["test_samples_per_stage"] = cfg.curriculum.test_samples_per_stage;
    cur["max_length"] = cfg.curriculum.max_length;
    cur["max_epochs_per_stage"] = cfg.curriculum.max_epochs_per_stage;
    cur["batch_size"] = cfg.curriculum.batch_size;
    root["curriculum"] = cur;

    json task;
    task["marker_count"] = cfg.task.marker_count;
    task["k"] = cfg.task.k;
    task["s_max"] = cfg.task.s_max;
    task["esn_steps"] = cfg.task.esn_steps;
    root["task"] = task;

    json snn;
    snn["theta"] = cfg.snn.theta;
    snn["oversampling"] = cfg.snn.oversampling;
    snn["bipolar"] = cfg.snn.bipolar;
    snn["theta_sweep"] = cfg.snn.theta_sweep;
    snn["alpha_smooth"] = cfg.snn.alpha_smooth;
    root["snn"] = snn;

    json ro;
    ro["method"] = cfg.readout.method == ReadoutMethod::Kind::Ridge ? "ridge" : "sgd";
    ro["ridge_lambda"] = cfg.readout.ridge_lambda;
    ro["sgd_epochs"] = cfg.readout.sgd_epochs;
    ro["sgd_learning_rate"] = cfg.readout.sgd_learning_rate;
    ro["washout"] = cfg.readout.washout;
    root["readout"] = ro;

    json eig;
    eig["n"] = cfg.eigen.n;
    eig["seeds"] = cfg.eigen.seeds;
    eig["alphas"] = cfg.eigen.alphas;
    root["eigen"] = eig;

    json gc;
    gc["epsilon"] = cfg.gradcheck.epsilon;
    root["gradcheck"] = gc;

    return root.dump(2) + "\n";
}

}  // namespace lprnn
