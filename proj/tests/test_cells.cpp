#include <doctest.h>

#include <cmath>
#include <vector>

#include "lprnn/cells.hpp"

using namespace lprnn;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Straight-line SimpleRNN reference: y_t = act(W_rec y_{t-1} + W_in x_t + b).
/// Written against the printed update, not against lprnn_forward.
std::vector<Vector> simple_rnn_oracle(const LpRnnParams& p, const std::vector<Vector>& x,
                                      Vector y) {
    std::vector<Vector> out;
    for (const Vector& xt : x) {
        Vector z(p.hidden());
        for (std::size_t i = 0; i < p.hidden(); ++i) {
            double s = p.b[i];
            for (std::size_t j = 0; j < p.hidden(); ++j) s += p.w_rec(i, j) * y[j];
            for (std::size_t j = 0; j < xt.size(); ++j) s += p.w_in(i, j) * xt[j];
            z[i] = s;
        }
        for (std::size_t i = 0; i < p.hidden(); ++i) y[i] = apply_activation(p.activation, z[i]);
        out.push_back(y);
    }
    return out;
}

/// Straight-line plain-LSTM reference with the printed gate equations.
std::vector<Vector> plain_lstm_oracle(const LpLstmParams& p, const std::vector<Vector>& x,
                                      Vector h, Vector c) {
    const std::size_t n = p.hidden();
    std::vector<Vector> out;
    auto gate = [&](const Matrix& w, const Matrix& w_rec, const Vector& b, const Vector& xt) {
        Vector z(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i];
            for (std::size_t j = 0; j < n; ++j) s += w_rec(i, j) * h[j];
            for (std::size_t j = 0; j < xt.size(); ++j) s += w(i, j) * xt[j];
            z[i] = s;
        }
        return z;
    };
    for (const Vector& xt : x) {
        Vector zf = gate(p.w_f, p.w_rec_f, p.b_f, xt);
        Vector zi = gate(p.w_i, p.w_rec_i, p.b_i, xt);
        Vector zo = gate(p.w_o, p.w_rec_o, p.b_o, xt);
        Vector zc = gate(p.w_c, p.w_rec_c, p.b_c, xt);
        Vector h_next(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double f = sigmoid(zf[i]);
            const double in = sigmoid(zi[i]);
            const double o = sigmoid(zo[i]);
            const double g = apply_activation(p.state_activation, zc[i]);
            c[i] = f * c[i] + in * g;
            h_next[i] = o * apply_activation(p.output_activation, c[i]);
        }
        h = h_next;
        out.push_back(h);
    }
    return out;
}

std::vector<Vector> random_seq(std::size_t len, std::size_t dim, SeededRng& rng) {
    std::vector<Vector> x(len, Vector(dim));
    for (auto& v : x)
        for (double& e : v.data) e = rng.uniform(-1, 1);
    return x;
}

}  // namespace

TEST_CASE("lprnn with alpha zero degenerates to the simple rnn") {
    for (std::uint64_t seed : {0, 1, 2, 3, 4}) {
        SeededRng rng(seed);
        AlphaConfig zero{AlphaConfig::Mode::Constant, 1.0, 200.0, 0.0};
        LpRnnParams p = init_lprnn(6, 3, Activation::Tanh, zero, rng);
        std::vector<Vector> x = random_seq(15, 3, rng);
        std::vector<Vector> got = lprnn_forward(p, x, Vector(6));
        std::vector<Vector> want = simple_rnn_oracle(p, x, Vector(6));
        for (std::size_t t = 0; t < x.size(); ++t)
            for (std::size_t i = 0; i < 6; ++i)
                CHECK(std::abs(got[t][i] - want[t][i]) <= 1e-12);
    }
}

TEST_CASE("lplstm with alpha zero degenerates to the plain lstm") {
    for (std::uint64_t seed : {3, 4, 5}) {
        SeededRng rng(seed);
        AlphaConfig zero{AlphaConfig::Mode::Constant, 1.0, 200.0, 0.0};
        LpLstmParams p = init_lplstm(4, 3, Activation::Relu, Activation::Relu, zero, rng);
        std::vector<Vector> x = random_seq(10, 3, rng);
        std::vector<Vector> got = lplstm_forward(p, x, Vector(4), Vector(4));
        std::vector<Vector> want = plain_lstm_oracle(p, x, Vector(4), Vector(4));
        for (std::size_t t = 0; t < x.size(); ++t)
            for (std::size_t i = 0; i < 4; ++i)
                CHECK(std::abs(got[t][i] - want[t][i]) <= 1e-12);
    }
}

TEST_CASE("scalar lprnn closed form: y_t = 1 - 0.5^t") {
    LpRnnParams p;
    p.w_in = Matrix(1, 1);
    p.w_in(0, 0) = 1.0;
    p.w_rec = Matrix(1, 1);  // zero
    p.b = Vector(1);
    p.alpha = Vector{0.5};
    p.activation = Activation::Identity;
    std::vector<Vector> x(12, Vector{1.0});
    std::vector<Vector> y = lprnn_forward(p, x, Vector(1));
    for (std::size_t t = 0; t < y.size(); ++t)
        CHECK(y[t][0] == 1.0 - std::pow(0.5, static_cast<double>(t + 1)));  // exact dyadics
}

TEST_CASE("alpha one freezes the lprnn and zeroes every gradient") {
    SeededRng rng(7);
    AlphaConfig frozen{AlphaConfig::Mode::Constant, 1.0, 200.0, 1.0};
    LpRnnParams p = init_lprnn(5, 2, Activation::Tanh, frozen, rng);
    std::vector<Vector> x = random_seq(8, 2, rng);
    Vector y0(5);
    for (double& v : y0.data) v = rng.uniform(-1, 1);

    LpRnnTrace trace;
    std::vector<Vector> y = lprnn_forward(p, x, y0, &trace);
    for (const Vector& yt : y) CHECK(yt == y0);

    std::vector<Vector> upstream = random_seq(8, 5, rng);
    LpRnnGrads g = lprnn_backward(p, trace, upstream);
    for (double v : g.d_w_in.data) CHECK(v == 0.0);
    for (double v : g.d_w_rec.data) CHECK(v == 0.0);
    for (double v : g.d_b.data) CHECK(v == 0.0);
}

TEST_CASE("alpha one freezes the lplstm output") {
    SeededRng rng(9);
    AlphaConfig frozen{AlphaConfig::Mode::Constant, 1.0, 200.0, 1.0};
    LpLstmParams p = init_lplstm(4, 2, Activation::Tanh, Activation::Tanh, frozen, rng);
    std::vector<Vector> x = random_seq(6, 2, rng);
    Vector h0(4);
    for (double& v : h0.data) v = rng.uniform(-1, 1);
    std::vector<Vector> h = lplstm_forward(p, x, h0, Vector(4));
    for (const Vector& ht : h) CHECK(ht == h0);
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
    SeededRng rng(11);
    AlphaConfig cfg;
    LpRnnParams p = init_lprnn(6, 3, Activation::Tanh, cfg, rng);
    std::vector<Vector> x = random_seq(10, 3, rng);
    LpRnnTrace trace;
    lprnn_forward(p, x, Vector(6), &trace);
    std::vector<Vector> upstream(10, Vector(6));
    LpRnnGrads g = lprnn_backward(p, trace, upstream);
    for (double v : g.d_w_in.data) CHECK(v == 0.0);
    for (double v : g.d_w_rec.data) CHECK(v == 0.0);
    for (double v : g.d_b.data) CHECK(v == 0.0);
}

TEST_CASE("forward passes are bit-deterministic") {
    SeededRng rng(13);
    AlphaConfig cfg;
    LpRnnParams p = init_lprnn(7, 2, Activation::Tanh, cfg, rng);
    std::vector<Vector> x = random_seq(20, 2, rng);
    LpRnnTrace t1, t2;
    std::vector<Vector> y1 = lprnn_forward(p, x, Vector(7), &t1);
    std::vector<Vector> y2 = lprnn_forward(p, x, Vector(7), &t2);
    for (std::size_t t = 0; t < 20; ++t) {
        CHECK(y1[t] == y2[t]);
        CHECK(t1.preact[t] == t2.preact[t]);
    }
}

TEST_CASE("gradient check: every cell against finite differences") {
    CHECK(gradient_check(GradCheckTarget::LpRnn, 6, 3, 8, 1, 1e-5) <= 1e-6);
    CHECK(gradient_check(GradCheckTarget::LpLstm, 4, 3, 6, 3, 1e-5) <= 1e-6);
    CHECK(gradient_check(GradCheckTarget::SimpleRnn, 6, 3, 8, 2, 1e-5) <= 1e-6);
    CHECK(gradient_check(GradCheckTarget::Lstm, 4, 3, 6, 5, 1e-5) <= 1e-6);
    CHECK(gradient_check(GradCheckTarget::DenseSoftmax, 5, 7, 10, 3, 1e-5) <= 1e-6);
}

TEST_CASE("gradient check covers the trainable-alpha path") {
    CHECK(gradient_check(GradCheckTarget::LpRnn, 6, 3, 8, 4, 1e-5, true) <= 1e-6);
}

TEST_CASE("shape validation rejects inconsistent parameters") {
    LpRnnParams p;
    p.w_in = Matrix(4, 2);
    p.w_rec = Matrix(4, 3);  // not square
    p.b = Vector(4);
    p.alpha = Vector(4, 0.5);
    CHECK_THROWS_AS(p.validate(), ShapeError);

    p.w_rec = Matrix(4, 4);
    p.alpha = Vector(4, 1.5);  // out of range
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("dense layer forward and backward match hand arithmetic") {
    Dense d;
    d.w = Matrix(2, 3);
    d.w.data = {1, 2, 3, 4, 5, 6};
    d.b = Vector{0.5, -0.5};
    Vector x{1, 0, -1};
    Vector y = dense_forward(d, x);
    CHECK(y == Vector{1 - 3 + 0.5, 4 - 6 - 0.5});

    DenseGrads g{Matrix(2, 3), Vector(2)};
    Vector dx = dense_backward(d, x, Vector{1.0, -1.0}, g);
    // dL/dx = w^T d_y
    CHECK(dx == Vector{1 - 4, 2 - 5, 3 - 6});
    // dL/dw = d_y x^T
    CHECK(g.d_w(0, 0) == 1.0);
    CHECK(g.d_w(0, 2) == -1.0);
    CHECK(g.d_w(1, 0) == -1.0);
    CHECK(g.d_b == Vector{1.0, -1.0});
}

TEST_CASE("mse loss hand case") {
    LossGrad lg = mse_loss(Vector{1, 2}, Vector{0, 0});
    CHECK(lg.loss == 2.5);            // (1 + 4) / 2
    CHECK(lg.grad == Vector{1, 2});   // 2 (p - t) / 2
    CHECK_THROWS_AS(mse_loss(Vector{1}, Vector{1, 2}), ShapeError);
}

TEST_CASE("softmax cross entropy hand case and finite-difference grad") {
    LossGrad lg = softmax_xent(Vector{0, 0}, 0);
    CHECK(lg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(lg.grad[0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(lg.grad[1] == doctest::Approx(0.5).epsilon(1e-12));

    // Large logits must not overflow.
    LossGrad big = softmax_xent(Vector{1000, 0}, 0);
    CHECK(big.loss == doctest::Approx(0.0).epsilon(1e-12));

    Vector logits{0.3, -1.2, 0.7};
    const std::size_t target = 2;
    LossGrad base = softmax_xent(logits, target);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double eps = 1e-6;
        Vector up = logits, dn = logits;
        up[i] += eps;
        dn[i] -= eps;
        const double fd = (softmax_xent(up, target).loss - softmax_xent(dn, target).loss) / (2 * eps);
        CHECK(base.grad[i] == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK_THROWS_AS(softmax_xent(logits, 3), DomainError);
}

TEST_CASE("sequence softmax averages per-step losses") {
    std::vector<Vector> logits{Vector{0, 0}, Vector{0, 0}};
    SeqLossGrad lg = softmax_xent_seq(logits, {0, 1});
    CHECK(lg.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(lg.grad.size() == 2);
    CHECK(lg.grad[0][0] == doctest::Approx(-0.25).epsilon(1e-12));  // (p - y) / T
}

TEST_CASE("initializers respect their documented ranges") {
    SeededRng rng(15);
    Matrix w = glorot_uniform(8, 6, rng);
    const double limit = std::sqrt(6.0 / (8 + 6));
    for (double v : w.data) {
        CHECK(v <= limit);
        CHECK(v >= -limit);
    }

    AlphaConfig cfg;  // log-uniform tau in [1, 200]
    Vector alpha = sample_alpha(1000, cfg, rng);
    for (double a : alpha.data) {
        CHECK(a >= std::exp(-1.0));
        CHECK(a <= std::exp(-1.0 / 200.0));
    }

    AlphaConfig constant{AlphaConfig::Mode::Constant, 1.0, 200.0, 0.25};
    Vector fixed = sample_alpha(5, constant, rng);
    for (double a : fixed.data) CHECK(a == 0.25);

    LpLstmParams lstm = init_lplstm(6, 3, Activation::Tanh, Activation::Tanh, cfg, rng);
    for (double v : lstm.b_f.data) CHECK(v == 1.0);  // forget gate starts open
    for (double v : lstm.b_i.data) CHECK(v == 0.0);

    SeededRng r1(33), r2(33);
    LpRnnParams a1 = init_lprnn(5, 2, Activation::Relu, cfg, r1);
    LpRnnParams a2 = init_lprnn(5, 2, Activation::Relu, cfg, r2);
    CHECK(a1.w_in == a2.w_in);
    CHECK(a1.w_rec == a2.w_rec);
    CHECK(a1.alpha == a2.alpha);
}

TEST_CASE("effective alpha follows the logit in trainable mode") {
    LpRnnParams p;
    p.w_in = Matrix(2, 1);
    p.w_rec = Matrix(2, 2);
    p.b = Vector(2);
    p.alpha = Vector{0.5, 0.5};
    p.train_alpha = true;
    p.alpha_logit = Vector{0.0, 2.0};
    Vector eff = p.effective_alpha();
    CHECK(eff[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eff[1] == doctest::Approx(sigmoid(2.0)).epsilon(1e-12));
}
