#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "lprnn/training.hpp"

using namespace lprnn;

namespace {

AdditionTask make_addition_task(std::uint64_t seed, std::size_t hidden) {
    SeededRng root(seed);
    SeededRng cell_rng = root.split(10);
    SeededRng readout_rng = root.split(11);
    AlphaConfig alpha;
    LpRnnParams cell = init_lprnn(hidden, 2, Activation::Relu, alpha, cell_rng);
    Dense readout = init_dense(1, hidden, readout_rng);
    return AdditionTask(std::move(cell), std::move(readout), 2);
}

std::vector<double> snapshot(TrainableTask& task) {
    std::vector<double> out;
    for (std::span<double> t : task.params()) out.insert(out.end(), t.begin(), t.end());
    return out;
}

/// Minimal task whose loss is immediately non-finite.
class ExplodingTask final : public TrainableTask {
public:
    std::vector<std::span<double>> params() override { return {std::span<double>(p_)}; }
    double sample_grad(std::size_t, SeededRng, std::span<std::vector<double>> sink) const override {
        sink[0][0] += 1.0;
        return std::numeric_limits<double>::infinity();
    }
    std::pair<double, double> evaluate_sample(std::size_t, SeededRng) const override {
        return {0.0, 1.0};
    }
    double baseline_metric(std::size_t) const override { return 0.0; }

private:
    std::vector<double> p_{1.0};
};

}  // namespace

TEST_CASE("sgd step hand case") {
    std::vector<double> p{1.0, -2.0};
    std::vector<double> g{0.5, 1.0};
    std::vector<std::span<double>> ps{std::span<double>(p)};
    std::vector<std::span<double>> gs{std::span<double>(g)};
    sgd_step(ps, gs, 0.1);
    CHECK(p[0] == 0.95);
    CHECK(p[1] == -2.1);
}

TEST_CASE("adam matches a straight-line oracle over three steps") {
    const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    OptimizerConfig cfg;
    cfg.kind = OptimizerConfig::Kind::Adam;
    cfg.learning_rate = lr;

    std::vector<double> p{0.3, -0.7};
    const std::vector<std::vector<double>> grads{{0.2, -0.1}, {-0.4, 0.3}, {0.1, 0.1}};

    // Oracle: textbook update carried out by hand arithmetic.
    std::vector<double> op = p, m(2, 0.0), v(2, 0.0);
    for (std::size_t t = 1; t <= grads.size(); ++t) {
        for (std::size_t i = 0; i < 2; ++i) {
            const double g = grads[t - 1][i];
            m[i] = b1 * m[i] + (1 - b1) * g;
            v[i] = b2 * v[i] + (1 - b2) * g * g;
            const double mhat = m[i] / (1 - std::pow(b1, static_cast<double>(t)));
            const double vhat = v[i] / (1 - std::pow(b2, static_cast<double>(t)));
            op[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }

    AdamState state;
    for (const auto& g : grads) {
        std::vector<double> gc = g;
        std::vector<std::span<double>> ps{std::span<double>(p)};
        std::vector<std::span<double>> gs{std::span<double>(gc)};
        adam_step(ps, gs, state, cfg);
    }
    CHECK(p[0] == doctest::Approx(op[0]).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(op[1]).epsilon(1e-14));
    CHECK(state.t == 3);
}

TEST_CASE("adam minimizes a quadratic") {
    OptimizerConfig cfg;
    cfg.kind = OptimizerConfig::Kind::Adam;
    cfg.learning_rate = 0.05;
    std::vector<double> p{1.0};
    AdamState state;
    for (int i = 0; i < 100; ++i) {
        std::vector<double> g{2.0 * p[0]};
        std::vector<std::span<double>> ps{std::span<double>(p)};
        std::vector<std::span<double>> gs{std::span<double>(g)};
        adam_step(ps, gs, state, cfg);
    }
    CHECK(std::abs(p[0]) < 0.1);
}

TEST_CASE("optimizer validation") {
    OptimizerConfig cfg;
    cfg.learning_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = OptimizerConfig{};
    cfg.clip_norm = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = OptimizerConfig{};
    cfg.beta1 = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("curriculum growth schedule") {
    CurriculumConfig c;  // x1.5 from 10, max 120
    std::vector<std::size_t> lengths{10};
    while (lengths.back() < c.max_length) lengths.push_back(c.next_length(lengths.back()));
    CHECK(lengths == std::vector<std::size_t>{10, 15, 23, 35, 53, 80, 120});

    CurriculumConfig copy_c;
    copy_c.initial_length = 3;
    copy_c.max_length = 50;
    std::vector<std::size_t> ts{3};
    while (ts.back() < copy_c.max_length) ts.push_back(copy_c.next_length(ts.back()));
    CHECK(ts == std::vector<std::size_t>{3, 5, 8, 12, 18, 27, 41, 50});

    CurriculumConfig add_c;
    add_c.growth = CurriculumConfig::Growth::Additive;
    add_c.growth_step = 10;
    CHECK(add_c.next_length(10) == 20);
    CHECK(add_c.next_length(115) == 120);  // clamped
}

TEST_CASE("advancement thresholds are strict") {
    CurriculumConfig mse;
    mse.advance_metric = CurriculumConfig::Metric::Mse;
    mse.advance_threshold = 0.001;
    CHECK(mse.threshold_met(0.0009));
    CHECK_FALSE(mse.threshold_met(0.001));

    CurriculumConfig acc;
    acc.advance_metric = CurriculumConfig::Metric::CategoricalAccuracy;
    acc.advance_threshold = 0.99;
    CHECK(acc.threshold_met(0.995));
    CHECK_FALSE(acc.threshold_met(0.99));
}

TEST_CASE("curriculum validation") {
    CurriculumConfig c;
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = CurriculumConfig{};
    c.max_length = 5;  // below initial_length 10
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = CurriculumConfig{};
    c.growth_rate = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("training is deterministic and thread-count invariant") {
    CurriculumConfig cur;
    cur.initial_length = 6;
    cur.max_length = 6;
    cur.train_samples_per_stage = 64;
    cur.test_samples_per_stage = 32;
    cur.max_epochs_per_stage = 2;
    cur.advance_threshold = 1e-12;  // never advances; we only compare states
    OptimizerConfig opt;

    auto run = [&](std::size_t threads) {
        AdditionTask task = make_addition_task(77, 8);
        TrainReport report = curriculum_run(task, cur, opt, 123, threads);
        return std::make_pair(snapshot(task), report);
    };

    auto [p1, r1] = run(1);
    auto [p1b, r1b] = run(1);
    auto [p4, r4] = run(4);

    REQUIRE(p1.size() == p1b.size());
    REQUIRE(p1.size() == p4.size());
    for (std::size_t i = 0; i < p1.size(); ++i) {
        CHECK(p1[i] == p1b[i]);
        CHECK(p1[i] == p4[i]);  // bit-exact across thread counts
    }
    REQUIRE(r1.rows.size() == r4.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i) {
        CHECK(r1.rows[i].train_loss == r4.rows[i].train_loss);
        CHECK(r1.rows[i].test_metric == r4.rows[i].test_metric);
    }
}

TEST_CASE("a tiny addition curriculum completes under a loose threshold") {
    CurriculumConfig cur;
    cur.initial_length = 6;
    cur.max_length = 9;
    cur.train_samples_per_stage = 600;
    cur.test_samples_per_stage = 200;
    cur.max_epochs_per_stage = 12;
    cur.advance_threshold = 0.3;  // loose: just has to beat an untrained net
    OptimizerConfig opt;

    AdditionTask task = make_addition_task(5, 8);
    TrainReport report = curriculum_run(task, cur, opt, 9, 1);
    REQUIRE(!report.stages.empty());
    CHECK(report.completed);
    CHECK(report.stages.front().length == 6);
    CHECK(report.stages.back().length == 9);
    for (const StageResult& s : report.stages) {
        CHECK(s.advanced);
        CHECK_FALSE(s.diverged);
        CHECK(s.baseline_metric == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    }
    CHECK(report.rows.size() >= report.stages.size());
}

TEST_CASE("a diverging task is reported, not thrown") {
    ExplodingTask task;
    CurriculumConfig cur;
    cur.initial_length = 4;
    cur.max_length = 4;
    cur.train_samples_per_stage = 8;
    cur.test_samples_per_stage = 4;
    cur.max_epochs_per_stage = 3;
    cur.batch_size = 4;
    OptimizerConfig opt;
    TrainReport report = curriculum_run(task, cur, opt, 1, 1);
    REQUIRE(report.stages.size() == 1);
    CHECK(report.stages[0].diverged);
    CHECK_FALSE(report.stages[0].advanced);
    CHECK_FALSE(report.completed);
}

TEST_CASE("task adapters expose the analytic baselines") {
    AdditionTask add = make_addition_task(3, 4);
    CHECK(add.baseline_metric(25) == doctest::Approx(2.0 / 12.0).epsilon(1e-15));
    auto [sq, cnt] = add.evaluate_sample(10, SeededRng(4));
    CHECK(cnt == 1.0);
    CHECK(sq >= 0.0);

    SeededRng root(8);
    SeededRng cell_rng = root.split(10);
    SeededRng ro_rng = root.split(11);
    AlphaConfig alpha;
    const std::size_t k = 4, s_max = 2;
    LpLstmParams cell =
        init_lplstm(6, k + 2, Activation::Tanh, Activation::Tanh, alpha, cell_rng);
    Dense readout = init_dense(k + 2, 6, ro_rng);
    CopyTask copy(std::move(cell), std::move(readout), k, s_max);
    CHECK(copy.baseline_metric(11) ==
          doctest::Approx(copy_blank_accuracy_floor(s_max, 11)).epsilon(1e-15));
    auto [correct, steps] = copy.evaluate_sample(11, SeededRng(5));
    CHECK(steps >= 1 + 11 + 1);
    CHECK(steps <= s_max + 11 + 1);
    CHECK(correct <= steps);
}

TEST_CASE("task constructors validate their shapes") {
    SeededRng rng(2);
    AlphaConfig alpha;
    LpRnnParams bad_cell = init_lprnn(4, 3, Activation::Relu, alpha, rng);  // input must be 2
    Dense ro = init_dense(1, 4, rng);
    CHECK_THROWS_AS(AdditionTask(bad_cell, ro, 2), ShapeError);

    LpRnnParams cell = init_lprnn(4, 2, Activation::Relu, alpha, rng);
    Dense bad_ro = init_dense(2, 4, rng);
    CHECK_THROWS_AS(AdditionTask(cell, bad_ro, 2), ShapeError);
}
