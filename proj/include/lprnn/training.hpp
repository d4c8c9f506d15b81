#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lprnn/cells.hpp"
#include "lprnn/numerics.hpp"
#include "lprnn/tasks.hpp"

namespace lprnn {

// ---- optimizers ------------------------------------------------------------------------

struct OptimizerConfig {
    enum class Kind { Sgd, Adam };
    Kind kind = Kind::Sgd;
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double clip_norm = 1000.0;

    void validate() const;
};

/// p <- p - lr * g over every tensor.
void sgd_step(std::span<std::span<double>> params, std::span<std::span<double>> grads, double lr);

/// First/second-moment buffers, lazily shaped on the first step.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::size_t t = 0;
};

/// Standard Adam with bias correction.
void adam_step(std::span<std::span<double>> params, std::span<std::span<double>> grads,
               AdamState& state, const OptimizerConfig& config);

// ---- curriculum -------------------------------------------------------------------------

struct CurriculumConfig {
    std::size_t initial_length = 10;
    enum class Metric { Mse, CategoricalAccuracy };
    Metric advance_metric = Metric::Mse;
    double advance_threshold = 0.001;
    enum class Growth { Multiplicative, Additive };
    Growth growth = Growth::Multiplicative;
    double growth_rate = 1.5;      // multiplicative factor
    std::size_t growth_step = 10;  // additive increment
    std::size_t train_samples_per_stage = 10000;
    std::size_t test_samples_per_stage = 1000;
    std::size_t max_length = 120;
    std::size_t max_epochs_per_stage = 40;
    std::size_t batch_size = 32;

    void validate() const;
    /// Next stage length under the growth rule, clamped to max_length.
    std::size_t next_length(std::size_t length) const;
    /// True when `metric` satisfies the advancement threshold.
    bool threshold_met(double metric) const;
};

/// One epoch of one stage, as written to the metrics CSV.
struct EpochRow {
    std::size_t stage = 0;
    std::size_t epoch = 0;
    std::size_t length = 0;
    double train_loss = 0.0;
    double test_metric = 0.0;
    double clip_scale_min = 1.0;
    double clip_scale_mean = 1.0;
    double wall_seconds = 0.0;
};

struct StageResult {
    std::size_t stage = 0;
    std::size_t length = 0;
    std::size_t epochs_run = 0;
    bool advanced = false;
    bool diverged = false;
    double final_test_metric = 0.0;
    double baseline_metric = 0.0;  // analytic floor of the metric at this length
};

struct TrainReport {
    std::vector<EpochRow> rows;
    std::vector<StageResult> stages;
    bool completed = false;  // final (max_length) stage reached and passed
};

/// A model bound to a task family. Implementations must be thread-safe for
/// concurrent sample_grad / evaluate_sample calls: parameters are read-only
/// during a batch and every per-call buffer lives on the stack.
class TrainableTask {
public:
    virtual ~TrainableTask() = default;

    /// Flat views of every trainable tensor, in a fixed order.
    virtual std::vector<std::span<double>> params() = 0;

    /// Loss of the sample drawn from `rng` at stage size `length`; adds its
    /// parameter gradients into `sink` (same layout as params()).
    virtual double sample_grad(std::size_t length, SeededRng rng,
                               std::span<std::vector<double>> sink) const = 0;

    /// Test metric contribution of one sample as a (sum, count) pair:
    /// mse contributes (squared error, 1), accuracy (correct steps, steps).
    virtual std::pair<double, double> evaluate_sample(std::size_t length, SeededRng rng) const = 0;

    /// Analytic floor of the test metric at this stage size (blank-predictor
    /// accuracy for copy, constant-predictor mse for addition).
    virtual double baseline_metric(std::size_t length) const = 0;
};

/// Addition task on a low-pass RNN cell with a scalar readout of the final state.
class AdditionTask final : public TrainableTask {
public:
    AdditionTask(LpRnnParams cell, Dense readout, std::size_t marker_count);

    std::vector<std::span<double>> params() override;
    double sample_grad(std::size_t length, SeededRng rng,
                       std::span<std::vector<double>> sink) const override;
    std::pair<double, double> evaluate_sample(std::size_t length, SeededRng rng) const override;
    double baseline_metric(std::size_t length) const override;

    const LpRnnParams& cell() const { return cell_; }
    const Dense& readout() const { return readout_; }

private:
    double forward_sample(const AdditionSample& sample, LpRnnTrace* trace, double* pred) const;

    LpRnnParams cell_;
    Dense readout_;
    std::size_t marker_count_;
};

/// Copy task on a low-pass LSTM cell with a per-step softmax readout.
/// The curriculum "length" is the blank count T; sequences have length s + T + 1.
class CopyTask final : public TrainableTask {
public:
    CopyTask(LpLstmParams cell, Dense readout, std::size_t k, std::size_t s_max);

    std::vector<std::span<double>> params() override;
    double sample_grad(std::size_t length, SeededRng rng,
                       std::span<std::vector<double>> sink) const override;
    std::pair<double, double> evaluate_sample(std::size_t length, SeededRng rng) const override;
    double baseline_metric(std::size_t length) const override;

    const LpLstmParams& cell() const { return cell_; }
    const Dense& readout() const { return readout_; }

private:
    LpLstmParams cell_;
    Dense readout_;
    std::size_t k_;
    std::size_t s_max_;
};

struct StageSpec {
    std::size_t stage = 0;
    std::size_t length = 0;
};

/// Trains one curriculum stage: epochs over a fresh per-stage dataset until
/// the advancement threshold is met or max_epochs_per_stage runs out. Appends
/// epoch rows to `report` and returns the stage outcome. A non-finite loss
/// aborts the stage and marks it diverged.
StageResult train_stage(TrainableTask& task, const StageSpec& stage,
                        const CurriculumConfig& curriculum, const OptimizerConfig& optimizer,
                        AdamState& adam, std::uint64_t seed, std::size_t threads,
                        TrainReport& report);

/// Runs stages from initial_length up to max_length under the growth rule.
/// Parameters carry over between stages; a failed or diverged stage terminates
/// the run with a partial report.
TrainReport curriculum_run(TrainableTask& task, const CurriculumConfig& curriculum,
                           const OptimizerConfig& optimizer, std::uint64_t seed,
                           std::size_t threads = 1);

}  // namespace lprnn
