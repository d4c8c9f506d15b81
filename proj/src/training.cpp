#include "lprnn/training.hpp"

#include <chrono>
#include <cmath>
#include <thread>

namespace lprnn {

// ---- optimizers ------------------------------------------------------------------------

void OptimizerConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("optimizer: learning_rate must be > 0");
    if (!(clip_norm > 0.0)) throw ConfigError("optimizer: clip_norm must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("optimizer: betas must lie in [0,1)");
    if (!(epsilon > 0.0)) throw ConfigError("optimizer: epsilon must be > 0");
}

namespace {

void check_same_layout(std::span<std::span<double>> params, std::span<std::span<double>> grads) {
    if (params.size() != grads.size()) throw ShapeError("optimizer: tensor count mismatch");
    for (std::size_t k = 0; k < params.size(); ++k)
        if (params[k].size() != grads[k].size()) throw ShapeError("optimizer: tensor size mismatch");
}

}  // namespace

void sgd_step(std::span<std::span<double>> params, std::span<std::span<double>> grads, double lr) {
    check_same_layout(params, grads);
    for (std::size_t k = 0; k < params.size(); ++k)
        for (std::size_t e = 0; e < params[k].size(); ++e) params[k][e] -= lr * grads[k][e];
}

void adam_step(std::span<std::span<double>> params, std::span<std::span<double>> grads,
               AdamState& state, const OptimizerConfig& config) {
    check_same_layout(params, grads);
    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t k = 0; k < params.size(); ++k) {
            state.m[k].assign(params[k].size(), 0.0);
            state.v[k].assign(params[k].size(), 0.0);
        }
    }
    if (state.m.size() != params.size()) throw ShapeError("adam_step: state tensor count mismatch");

    state.t += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (state.m[k].size() != params[k].size())
            throw ShapeError("adam_step: state tensor size mismatch");
        for (std::size_t e = 0; e < params[k].size(); ++e) {
            const double g = grads[k][e];
            state.m[k][e] = config.beta1 * state.m[k][e] + (1.0 - config.beta1) * g;
            state.v[k][e] = config.beta2 * state.v[k][e] + (1.0 - config.beta2) * g * g;
            const double m_hat = state.m[k][e] / bc1;
            const double v_hat = state.v[k][e] / bc2;
            params[k][e] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
        }
    }
}

// ---- curriculum config -------------------------------------------------------------------

void CurriculumConfig::validate() const {
    if (initial_length < 1) throw ConfigError("curriculum: initial_length must be >= 1");
    if (max_length < initial_length)
        throw ConfigError("curriculum: max_length must be >= initial_length");
    if (growth == Growth::Multiplicative && !(growth_rate > 1.0))
        throw ConfigError("curriculum: growth_rate must be > 1");
    if (growth == Growth::Additive && growth_step < 1)
        throw ConfigError("curriculum: growth_step must be >= 1");
    if (advance_metric == Metric::Mse && !(advance_threshold > 0.0))
        throw ConfigError("curriculum: mse threshold must be > 0");
    if (advance_metric == Metric::CategoricalAccuracy &&
        !(advance_threshold > 0.0 && advance_threshold < 1.0))
        throw ConfigError("curriculum: accuracy threshold must lie in (0,1)");
    if (train_samples_per_stage < 1 || test_samples_per_stage < 1)
        throw ConfigError("curriculum: sample counts must be >= 1");
    if (max_epochs_per_stage < 1) throw ConfigError("curriculum: max_epochs_per_stage must be >= 1");
    if (batch_size < 1) throw ConfigError("curriculum: batch_size must be >= 1");
}

std::size_t CurriculumConfig::next_length(std::size_t length) const {
    std::size_t next;
    if (growth == Growth::Multiplicative)
        next = static_cast<std::size_t>(std::ceil(static_cast<double>(length) * growth_rate));
    else
        next = length + growth_step;
    if (next <= length) next = length + 1;
    return std::min(next, max_length);
}

bool CurriculumConfig::threshold_met(double metric) const {
    if (advance_metric == Metric::Mse) return metric < advance_threshold;
    return metric > advance_threshold;
}

// ---- task bindings -------------------------------------------------------------------------

namespace {

void add_into(std::vector<double>& sink, const std::vector<double>& src) {
    for (std::size_t e = 0; e < src.size(); ++e) sink[e] += src[e];
}

}  // namespace

AdditionTask::AdditionTask(LpRnnParams cell, Dense readout, std::size_t marker_count)
    : cell_(std::move(cell)), readout_(std::move(readout)), marker_count_(marker_count) {
    cell_.validate();
    if (cell_.input() != 2) throw ShapeError("AdditionTask: cell must take the 2 input lanes");
    if (readout_.out() != 1 || readout_.in() != cell_.hidden())
        throw ShapeError("AdditionTask: readout must map hidden -> 1");
    if (marker_count_ < 2) throw DomainError("AdditionTask: need at least 2 markers");
}

std::vector<std::span<double>> AdditionTask::params() {
    std::vector<std::span<double>> out{
        {cell_.w_in.data}, {cell_.w_rec.data}, {cell_.b.data}};
    if (cell_.train_alpha) out.push_back({cell_.alpha_logit.data});
    out.push_back({readout_.w.data});
    out.push_back({readout_.b.data});
    return out;
}

double AdditionTask::forward_sample(const AdditionSample& sample, LpRnnTrace* trace,
                                    double* pred) const {
    const auto y = lprnn_forward(cell_, sample.x, Vector(cell_.hidden(), 0.0), trace);
    const Vector out = dense_forward(readout_, y.back());
    if (pred) *pred = out[0];
    const double diff = out[0] - sample.target;
    return diff * diff;
}

double AdditionTask::sample_grad(std::size_t length, SeededRng rng,
                                 std::span<std::vector<double>> sink) const {
    const AdditionSample sample = gen_addition(length, marker_count_, rng);
    LpRnnTrace trace;
    lprnn_forward(cell_, sample.x, Vector(cell_.hidden(), 0.0), &trace);

    const Vector& y_last = trace.y.back();
    const Vector out = dense_forward(readout_, y_last);
    const LossGrad lg = mse_loss(out, Vector{sample.target});

    DenseGrads racc{Matrix(1, cell_.hidden()), Vector(1)};
    const Vector d_y_last = dense_backward(readout_, y_last, lg.grad, racc);

    std::vector<Vector> upstream(trace.steps(), Vector(cell_.hidden(), 0.0));
    upstream.back() = d_y_last;
    LpRnnGrads grads = lprnn_backward(cell_, trace, upstream);

    std::size_t slot = 0;
    add_into(sink[slot++], grads.d_w_in.data);
    add_into(sink[slot++], grads.d_w_rec.data);
    add_into(sink[slot++], grads.d_b.data);
    if (cell_.train_alpha) add_into(sink[slot++], grads.d_alpha_logit.data);
    add_into(sink[slot++], racc.d_w.data);
    add_into(sink[slot++], racc.d_b.data);
    return lg.loss;
}

std::pair<double, double> AdditionTask::evaluate_sample(std::size_t length, SeededRng rng) const {
    const AdditionSample sample = gen_addition(length, marker_count_, rng);
    return {forward_sample(sample, nullptr, nullptr), 1.0};
}

double AdditionTask::baseline_metric(std::size_t) const {
    // Variance of the sum of marker_count uniform(0,1) draws: the mse of the
    // best constant predictor.
    return static_cast<double>(marker_count_) / 12.0;
}

CopyTask::CopyTask(LpLstmParams cell, Dense readout, std::size_t k, std::size_t s_max)
    : cell_(std::move(cell)), readout_(std::move(readout)), k_(k), s_max_(s_max) {
    cell_.validate();
    if (k_ < 2) throw DomainError("CopyTask: alphabet needs at least 2 data symbols");
    if (s_max_ < 1) throw DomainError("CopyTask: s_max must be >= 1");
    if (cell_.input() != k_ + 2)
        throw ShapeError("CopyTask: cell input must cover the k+2 one-hot classes");
    if (readout_.out() != k_ + 2 || readout_.in() != cell_.hidden())
        throw ShapeError("CopyTask: readout must map hidden -> k+2");
}

std::vector<std::span<double>> CopyTask::params() {
    return {
        {cell_.w_f.data},     {cell_.w_i.data},     {cell_.w_o.data},     {cell_.w_c.data},
        {cell_.w_rec_f.data}, {cell_.w_rec_i.data}, {cell_.w_rec_o.data}, {cell_.w_rec_c.data},
        {cell_.b_f.data},     {cell_.b_i.data},     {cell_.b_o.data},     {cell_.b_c.data},
        {readout_.w.data},    {readout_.b.data},
    };
}

double CopyTask::sample_grad(std::size_t length, SeededRng rng,
                             std::span<std::vector<double>> sink) const {
    const CopySample sample = gen_copy(s_max_, length, k_, rng);
    const std::size_t n = cell_.hidden();
    LpLstmTrace trace;
    lplstm_forward(cell_, sample.x, Vector(n, 0.0), Vector(n, 0.0), &trace);

    std::vector<Vector> logits;
    logits.reserve(trace.steps());
    for (const Vector& h : trace.h) logits.push_back(dense_forward(readout_, h));
    const SeqLossGrad lg = softmax_xent_seq(logits, sample.target);

    DenseGrads racc{Matrix(k_ + 2, n), Vector(k_ + 2)};
    std::vector<Vector> upstream;
    upstream.reserve(trace.steps());
    for (std::size_t t = 0; t < trace.steps(); ++t)
        upstream.push_back(dense_backward(readout_, trace.h[t], lg.grad[t], racc));
    LpLstmGrads grads = lplstm_backward(cell_, trace, upstream);

    std::size_t slot = 0;
    for (const auto* m : {&grads.d_w_f, &grads.d_w_i, &grads.d_w_o, &grads.d_w_c, &grads.d_w_rec_f,
                          &grads.d_w_rec_i, &grads.d_w_rec_o, &grads.d_w_rec_c})
        add_into(sink[slot++], m->data);
    for (const auto* v : {&grads.d_b_f, &grads.d_b_i, &grads.d_b_o, &grads.d_b_c})
        add_into(sink[slot++], v->data);
    add_into(sink[slot++], racc.d_w.data);
    add_into(sink[slot++], racc.d_b.data);
    return lg.loss;
}

std::pair<double, double> CopyTask::evaluate_sample(std::size_t length, SeededRng rng) const {
    const CopySample sample = gen_copy(s_max_, length, k_, rng);
    const std::size_t n = cell_.hidden();
    const auto h_seq = lplstm_forward(cell_, sample.x, Vector(n, 0.0), Vector(n, 0.0));
    double correct = 0.0;
    for (std::size_t t = 0; t < h_seq.size(); ++t) {
        const Vector logits = dense_forward(readout_, h_seq[t]);
        if (one_hot_decode(logits) == sample.target[t]) correct += 1.0;
    }
    return {correct, static_cast<double>(h_seq.size())};
}

double CopyTask::baseline_metric(std::size_t length) const {
    return copy_blank_accuracy_floor(s_max_, length);
}

// ---- stage / curriculum drivers --------------------------------------------------------------

namespace {

/// Runs fn(i) for i in [0, n) with a static stride schedule. Results must be
/// written to per-index slots; the caller reduces them in index order so the
/// outcome is identical for every thread count.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&fn, w, workers, n] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    for (auto& t : pool) t.join();
}

std::vector<std::vector<double>> make_grad_buffer(const std::vector<std::span<double>>& params) {
    std::vector<std::vector<double>> buf(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) buf[k].assign(params[k].size(), 0.0);
    return buf;
}

std::vector<std::span<double>> as_spans(std::vector<std::vector<double>>& buf) {
    std::vector<std::span<double>> spans;
    spans.reserve(buf.size());
    for (auto& t : buf) spans.emplace_back(t);
    return spans;
}

}  // namespace

StageResult train_stage(TrainableTask& task, const StageSpec& stage,
                        const CurriculumConfig& curriculum, const OptimizerConfig& optimizer,
                        AdamState& adam, std::uint64_t seed, std::size_t threads,
                        TrainReport& report) {
    curriculum.validate();
    optimizer.validate();

    StageResult result;
    result.stage = stage.stage;
    result.length = stage.length;
    result.baseline_metric = task.baseline_metric(stage.length);

    const SeededRng root(seed, 0);
    const SeededRng train_root = root.split(1).split(stage.stage);
    const SeededRng test_root = root.split(2).split(stage.stage);

    const std::size_t n_train = curriculum.train_samples_per_stage;
    const std::size_t n_test = curriculum.test_samples_per_stage;
    const std::size_t batch = curriculum.batch_size;

    auto params = task.params();
    auto grand = make_grad_buffer(params);
    std::vector<std::vector<std::vector<double>>> sinks(std::min(batch, n_train));
    for (auto& s : sinks) s = make_grad_buffer(params);
    std::vector<double> sample_loss(sinks.size(), 0.0);
    std::vector<std::pair<double, double>> eval_slots(n_test);

    for (std::size_t epoch = 0; epoch < curriculum.max_epochs_per_stage; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        double loss_sum = 0.0;
        double clip_min = 1.0;
        double clip_sum = 0.0;
        std::size_t n_batches = 0;
        bool finite = true;

        for (std::size_t start = 0; start < n_train && finite; start += batch) {
            const std::size_t b = std::min(batch, n_train - start);
            for (std::size_t i = 0; i < b; ++i)
                for (auto& tensor : sinks[i])
                    std::fill(tensor.begin(), tensor.end(), 0.0);

            parallel_for(b, threads, [&](std::size_t i) {
                sample_loss[i] = task.sample_grad(stage.length, train_root.split(start + i),
                                                  std::span<std::vector<double>>(sinks[i]));
            });

            double batch_loss = 0.0;
            for (std::size_t i = 0; i < b; ++i) batch_loss += sample_loss[i];
            loss_sum += batch_loss;

            const double inv = 1.0 / static_cast<double>(b);
            for (std::size_t k = 0; k < grand.size(); ++k) {
                std::fill(grand[k].begin(), grand[k].end(), 0.0);
                for (std::size_t i = 0; i < b; ++i) add_into(grand[k], sinks[i][k]);
                for (double& e : grand[k]) e *= inv;
            }

            auto grad_spans = as_spans(grand);
            const ClipResult clip =
                clip_global_norm(std::span<std::span<double>>(grad_spans), optimizer.clip_norm);
            if (!std::isfinite(batch_loss) || !std::isfinite(clip.norm)) {
                finite = false;
                break;
            }
            clip_min = std::min(clip_min, clip.applied_scale);
            clip_sum += clip.applied_scale;
            ++n_batches;

            if (optimizer.kind == OptimizerConfig::Kind::Sgd)
                sgd_step(std::span<std::span<double>>(params), grad_spans,
                         optimizer.learning_rate);
            else
                adam_step(std::span<std::span<double>>(params), grad_spans, adam, optimizer);
        }

        if (!finite) {
            result.diverged = true;
            result.epochs_run = epoch + 1;
            break;
        }

        parallel_for(n_test, threads, [&](std::size_t i) {
            eval_slots[i] = task.evaluate_sample(stage.length, test_root.split(i));
        });
        double metric_sum = 0.0, metric_count = 0.0;
        for (const auto& [s, c] : eval_slots) {
            metric_sum += s;
            metric_count += c;
        }
        const double metric = metric_sum / metric_count;
        const auto t1 = std::chrono::steady_clock::now();

        EpochRow row;
        row.stage = stage.stage;
        row.epoch = epoch;
        row.length = stage.length;
        row.train_loss = loss_sum / static_cast<double>(n_train);
        row.test_metric = metric;
        row.clip_scale_min = clip_min;
        row.clip_scale_mean = n_batches > 0 ? clip_sum / static_cast<double>(n_batches) : 1.0;
        row.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
        report.rows.push_back(row);

        result.epochs_run = epoch + 1;
        result.final_test_metric = metric;
        if (!std::isfinite(metric)) {
            result.diverged = true;
            break;
        }
        if (curriculum.threshold_met(metric)) {
            result.advanced = true;
            break;
        }
    }
    return result;
}

TrainReport curriculum_run(TrainableTask& task, const CurriculumConfig& curriculum,
                           const OptimizerConfig& optimizer, std::uint64_t seed,
                           std::size_t threads) {
    curriculum.validate();
    optimizer.validate();

    TrainReport report;
    AdamState adam;
    std::size_t length = curriculum.initial_length;
    std::size_t stage_idx = 0;
    for (;;) {
        const StageResult sr = train_stage(task, {stage_idx, length}, curriculum, optimizer, adam,
                                           seed, threads, report);
        report.stages.push_back(sr);
        if (!sr.advanced) break;
        if (length >= curriculum.max_length) {
            report.completed = true;
            break;
        }
        length = curriculum.next_length(length);
        ++stage_idx;
    }
    return report;
}

}  // namespace lprnn
