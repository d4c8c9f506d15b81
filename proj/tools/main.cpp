#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lprnn/experiments.hpp"
#include "lprnn/tasks.hpp"

namespace {

using namespace lprnn;

std::string output_root() {
    const char* v = std::getenv("LPRNN_OUTPUT_ROOT");
    return v ? v : "";
}

int emit_error(const char* kind, const std::string& message, int code) {
    nlohmann::json err;
    err["error"] = kind;
    err["message"] = message;
    std::cerr << err.dump() << "\n";
    return code;
}

int do_run(const ExperimentConfig& cfg, std::size_t threads) {
    const RunOutcome out = run_experiment(cfg, threads, output_root());
    std::cout << "wrote " << out.run_dir << "\n";
    if (out.diverged)
        return emit_error("diverged", "training diverged; partial report in " + out.run_dir, 3);
    return 0;
}

void dump_addition(std::ostream& out, std::size_t count, std::size_t length, std::size_t markers,
                   std::uint64_t seed) {
    out << "sample,t,value,marker,target\n";
    SeededRng root(seed);
    for (std::size_t i = 0; i < count; ++i) {
        SeededRng rng = root.split(i);
        const AdditionSample s = gen_addition(length, markers, rng);
        for (std::size_t t = 0; t < s.x.size(); ++t)
            out << i << ',' << t << ',' << s.x[t][0] << ',' << s.x[t][1] << ',' << s.target
                << '\n';
    }
}

void dump_copy(std::ostream& out, std::size_t count, std::size_t s_max, std::size_t t_blanks,
               std::size_t k, std::uint64_t seed) {
    out << "sample,t,input_class,target_class\n";
    SeededRng root(seed);
    for (std::size_t i = 0; i < count; ++i) {
        SeededRng rng = root.split(i);
        const CopySample s = gen_copy(s_max, t_blanks, k, rng);
        for (std::size_t t = 0; t < s.x.size(); ++t)
            out << i << ',' << t << ',' << one_hot_decode(s.x[t]) << ',' << s.target[t] << '\n';
    }
}

void dump_esn_pattern(std::ostream& out, std::size_t steps, std::uint64_t seed) {
    out << "t,x,label\n";
    SeededRng rng(seed);
    const EsnPatternSignal sig = gen_esn_pattern(steps, rng);
    for (std::size_t t = 0; t < sig.x.size(); ++t)
        out << t << ',' << sig.x[t] << ',' << sig.label_trace[t] << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-pass RNN cells, curriculum tasks and the spiking-network mapping"};
    app.require_subcommand(1);

    std::string config_path;
    std::size_t threads = 1;
    CLI::App* run_cmd = app.add_subcommand("run", "run an experiment from a JSON config");
    run_cmd->add_option("--config", config_path, "JSON config path")->required();
    run_cmd->add_option("--threads", threads, "worker threads; 1 (default) is bit-reproducible");

    std::string report_dir;
    CLI::App* report_cmd = app.add_subcommand("report", "render a run directory as a text table");
    report_cmd->add_option("dir", report_dir, "run directory")->required();

    std::string task_kind = "addition";
    std::string task_out;
    std::size_t gt_count = 10, gt_length = 10, gt_markers = 2, gt_k = 8, gt_s_max = 5,
                gt_t_blanks = 10, gt_steps = 1000;
    std::uint64_t gt_seed = 42;
    CLI::App* gen_cmd = app.add_subcommand("gen-task", "dump task samples to CSV");
    gen_cmd->add_option("--task", task_kind, "addition | copy | esn-pattern")
        ->check(CLI::IsMember({"addition", "copy", "esn-pattern"}));
    gen_cmd->add_option("--out", task_out, "CSV path (default stdout)");
    gen_cmd->add_option("--count", gt_count, "samples to generate");
    gen_cmd->add_option("--length", gt_length, "addition: sequence length");
    gen_cmd->add_option("--markers", gt_markers, "addition: marked positions");
    gen_cmd->add_option("--k", gt_k, "copy: data alphabet size");
    gen_cmd->add_option("--s-max", gt_s_max, "copy: max data symbols");
    gen_cmd->add_option("--t-blanks", gt_t_blanks, "copy: blank steps");
    gen_cmd->add_option("--steps", gt_steps, "esn-pattern: signal length");
    gen_cmd->add_option("--seed", gt_seed, "RNG seed");

    std::size_t eig_n = 20, eig_seeds = 100;
    std::uint64_t eig_seed = 42;
    std::string eig_out = "runs/analyze-eigen";
    CLI::App* eig_cmd =
        app.add_subcommand("analyze-eigen", "planted-spectrum check of the eigenvalue shift");
    eig_cmd->add_option("--n", eig_n, "matrix size");
    eig_cmd->add_option("--seeds", eig_seeds, "number of random matrices");
    eig_cmd->add_option("--seed", eig_seed, "RNG seed");
    eig_cmd->add_option("--out", eig_out, "output directory");

    std::string ms_ckpt, ms_out = "runs/map-snn";
    double ms_theta = 0.01;
    std::size_t ms_m = 64, ms_steps = 4000;
    std::uint64_t ms_seed = 42;
    CLI::App* ms_cmd = app.add_subcommand(
        "map-snn", "map a reservoir/cell checkpoint to a spiking network and compare");
    ms_cmd->add_option("--checkpoint", ms_ckpt, "esn or lprnn checkpoint (default: fresh demo)");
    ms_cmd->add_option("--theta", ms_theta, "spike quantum");
    ms_cmd->add_option("--oversampling", ms_m, "substeps per step");
    ms_cmd->add_option("--steps", ms_steps, "signal length");
    ms_cmd->add_option("--seed", ms_seed, "RNG seed");
    ms_cmd->add_option("--out", ms_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return do_run(load_experiment_config(config_path), threads);
        if (*report_cmd) {
            std::cout << render_report(report_dir);
            return 0;
        }
        if (*gen_cmd) {
            std::ofstream file;
            if (!task_out.empty()) {
                file.open(task_out);
                if (!file) throw IoError("cannot write " + task_out);
            }
            std::ostream& out = task_out.empty() ? std::cout : file;
            if (task_kind == "addition")
                dump_addition(out, gt_count, gt_length, gt_markers, gt_seed);
            else if (task_kind == "copy")
                dump_copy(out, gt_count, gt_s_max, gt_t_blanks, gt_k, gt_seed);
            else
                dump_esn_pattern(out, gt_steps, gt_seed);
            if (!task_out.empty() && !file) throw IoError("failed writing " + task_out);
            return 0;
        }
        if (*eig_cmd) {
            nlohmann::json j;
            j["experiment"] = "analyze-eigen";
            j["seed"] = eig_seed;
            j["output_dir"] = eig_out;
            j["eigen"]["n"] = eig_n;
            j["eigen"]["seeds"] = eig_seeds;
            return do_run(parse_experiment_config(j.dump()), 1);
        }
        if (*ms_cmd) {
            nlohmann::json j;
            j["experiment"] = "map-snn";
            j["seed"] = ms_seed;
            j["output_dir"] = ms_out;
            if (!ms_ckpt.empty()) j["checkpoint"] = ms_ckpt;
            j["snn"]["theta"] = ms_theta;
            j["snn"]["oversampling"] = ms_m;
            j["task"]["esn_steps"] = ms_steps;
            return do_run(parse_experiment_config(j.dump()), 1);
        }
    } catch (const ConfigError& e) {
        return emit_error("config", e.what(), 2);
    } catch (const DivergenceError& e) {
        return emit_error("diverged", e.what(), 3);
    } catch (const IoError& e) {
        return emit_error("io", e.what(), 4);
    } catch (const std::exception& e) {
        return emit_error("internal", e.what(), 1);
    }
    return 0;
}
