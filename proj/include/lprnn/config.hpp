#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lprnn/cells.hpp"
#include "lprnn/esn.hpp"
#include "lprnn/snn.hpp"
#include "lprnn/training.hpp"

namespace lprnn {

enum class ExperimentKind { Addition, Copy, EsnPattern, MapSnn, AnalyzeEigen, Gradcheck };

const char* experiment_kind_name(ExperimentKind k);

enum class CellKind { SimpleRnn, LpRnn, Lstm, LpLstm };

struct ModelConfig {
    CellKind cell = CellKind::LpRnn;
    std::size_t hidden = 128;
    Activation activation = Activation::Relu;         // lprnn / simple_rnn
    Activation state_activation = Activation::Tanh;   // lstm / lplstm
    Activation output_activation = Activation::Tanh;  // lstm / lplstm
    AlphaConfig alpha;
    double rho_target = 0.95;  // esn experiments
    // esn experiments; parse_experiment_config picks the per-experiment value
    double input_scale = 1.0;
};

struct TaskSectionConfig {
    std::size_t marker_count = 2;  // addition
    std::size_t k = 8;             // copy
    std::size_t s_max = 5;         // copy
    std::size_t esn_steps = 4000;  // esn-pattern / map-snn signal length
};

struct SnnSectionConfig {
    double theta = 0.01;
    std::size_t oversampling = 64;
    bool bipolar = true;
    std::vector<double> theta_sweep{0.1, 0.03, 0.01, 0.003};
    double alpha_smooth = 0.9;
};

struct ReadoutSectionConfig {
    ReadoutMethod::Kind method = ReadoutMethod::Kind::Ridge;
    double ridge_lambda = 1e-4;
    std::size_t sgd_epochs = 20;
    double sgd_learning_rate = 0.05;
    std::size_t washout = 100;
};

struct EigenSectionConfig {
    std::size_t n = 20;
    std::size_t seeds = 100;
    std::vector<double> alphas{0.0, 0.3, 0.6, 0.9, 1.0};
};

struct GradcheckSectionConfig {
    double epsilon = 1e-5;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::Addition;
    std::uint64_t seed = 42;
    std::string output_dir;
    std::string checkpoint;  // map-snn: optional source network
    ModelConfig model;
    OptimizerConfig optimizer;
    CurriculumConfig curriculum;
    TaskSectionConfig task;
    SnnSectionConfig snn;
    ReadoutSectionConfig readout;
    EigenSectionConfig eigen;
    GradcheckSectionConfig gradcheck;
};

/// Parses and validates a config. Unknown keys, wrong types, and out-of-range
/// values all raise ConfigError naming the offending path. Defaults follow the
/// reference setup: sgd with lr 0.01 / clip 1000 for the lprnn family, lr
/// 0.005 / clip 1 for the lstm family, 10000 train and 1000 test samples per
/// stage.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// The config with every default materialized, as written to resolved_config.json.
std::string resolved_config_json(const ExperimentConfig& config);

}  // namespace lprnn
