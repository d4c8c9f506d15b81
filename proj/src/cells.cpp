#include "lprnn/cells.hpp"

#include <cmath>
#include <functional>

namespace lprnn {

namespace {

void check_alpha_range(const Vector& alpha) {
    for (double a : alpha.data)
        if (!(a >= 0.0 && a <= 1.0)) throw DomainError("alpha outside [0,1]");
}

Vector sigmoid_vec(const Vector& v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-v[i]));
    return out;
}

}  // namespace

// ---- LpRnn ---------------------------------------------------------------------------

Vector LpRnnParams::effective_alpha() const {
    if (!train_alpha) return alpha;
    return sigmoid_vec(alpha_logit);
}

void LpRnnParams::validate() const {
    const std::size_t n = hidden();
    if (w_in.rows != n || w_rec.cols != n || b.size() != n)
        throw ShapeError("LpRnnParams: inconsistent shapes");
    if (train_alpha) {
        if (alpha_logit.size() != n) throw ShapeError("LpRnnParams: alpha_logit size");
    } else {
        if (alpha.size() != n) throw ShapeError("LpRnnParams: alpha size");
        check_alpha_range(alpha);
    }
}

std::vector<std::span<double>> LpRnnGrads::tensors() {
    std::vector<std::span<double>> out{
        {d_w_in.data}, {d_w_rec.data}, {d_b.data}};
    if (!d_alpha_logit.data.empty()) out.push_back({d_alpha_logit.data});
    return out;
}

std::vector<Vector> lprnn_forward(const LpRnnParams& params, const std::vector<Vector>& x_seq,
                                  const Vector& y0, LpRnnTrace* trace) {
    params.validate();
    if (y0.size() != params.hidden()) throw ShapeError("lprnn_forward: y0 size");
    const Vector alpha = params.effective_alpha();
    const std::size_t n = params.hidden();

    if (trace) {
        *trace = LpRnnTrace{};
        trace->y0 = y0;
        trace->x.reserve(x_seq.size());
        trace->preact.reserve(x_seq.size());
        trace->act.reserve(x_seq.size());
        trace->y.reserve(x_seq.size());
    }

    std::vector<Vector> outputs;
    outputs.reserve(x_seq.size());
    const Vector* prev = &y0;
    for (const Vector& xt : x_seq) {
        if (xt.size() != params.input()) throw ShapeError("lprnn_forward: input size");
        Vector z = matvec(params.w_rec, *prev);
        const Vector zin = matvec(params.w_in, xt);
        for (std::size_t i = 0; i < n; ++i) z[i] += zin[i] + params.b[i];
        Vector a = activate(z, params.activation);
        Vector y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = alpha[i] * (*prev)[i] + (1.0 - alpha[i]) * a[i];
        if (trace) {
            trace->x.push_back(xt);
            trace->preact.push_back(std::move(z));
            trace->act.push_back(std::move(a));
            trace->y.push_back(y);
        }
        outputs.push_back(std::move(y));
        prev = &outputs.back();
    }
    return outputs;
}

LpRnnGrads lprnn_backward(const LpRnnParams& params, const LpRnnTrace& trace,
                          const std::vector<Vector>& dL_dy_seq) {
    params.validate();
    const std::size_t n = params.hidden();
    const std::size_t steps = trace.steps();
    if (dL_dy_seq.size() != steps) throw ShapeError("lprnn_backward: upstream length mismatch");
    if (trace.x.size() != steps || trace.preact.size() != steps || trace.act.size() != steps)
        throw ShapeError("lprnn_backward: trace is incomplete");

    const Vector alpha = params.effective_alpha();
    LpRnnGrads grads;
    grads.d_w_in = Matrix(params.w_in.rows, params.w_in.cols);
    grads.d_w_rec = Matrix(n, n);
    grads.d_b = Vector(n);
    Vector d_alpha(n);

    Vector carry(n, 0.0);
    Vector dz(n);
    for (std::size_t t = steps; t-- > 0;) {
        if (dL_dy_seq[t].size() != n) throw ShapeError("lprnn_backward: upstream size mismatch");
        const Vector& y_prev = (t == 0) ? trace.y0 : trace.y[t - 1];
        Vector delta = add(dL_dy_seq[t], carry);
        for (std::size_t k = 0; k < n; ++k) {
            const double sig_grad =
                activation_grad(params.activation, trace.preact[t][k], trace.act[t][k]);
            dz[k] = delta[k] * (1.0 - alpha[k]) * sig_grad;
        }
        add_outer(grads.d_w_in, dz, trace.x[t]);
        add_outer(grads.d_w_rec, dz, y_prev);
        for (std::size_t k = 0; k < n; ++k) grads.d_b[k] += dz[k];
        if (params.train_alpha)
            for (std::size_t k = 0; k < n; ++k)
                d_alpha[k] += delta[k] * (y_prev[k] - trace.act[t][k]);

        Vector next_carry = matvec_transposed(params.w_rec, dz);
        for (std::size_t k = 0; k < n; ++k) next_carry[k] += alpha[k] * delta[k];
        carry = std::move(next_carry);
    }

    if (params.train_alpha) {
        grads.d_alpha_logit = Vector(n);
        for (std::size_t k = 0; k < n; ++k)
            grads.d_alpha_logit[k] = d_alpha[k] * alpha[k] * (1.0 - alpha[k]);
    }
    return grads;
}

// ---- LpLstm --------------------------------------------------------------------------

void LpLstmParams::validate() const {
    const std::size_t n = hidden();
    const std::size_t in = input();
    auto check_kernel = [&](const Matrix& m) {
        if (m.rows != n || m.cols != in) throw ShapeError("LpLstmParams: input kernel shape");
    };
    auto check_rec = [&](const Matrix& m) {
        if (m.rows != n || m.cols != n) throw ShapeError("LpLstmParams: recurrent kernel shape");
    };
    auto check_bias = [&](const Vector& v) {
        if (v.size() != n) throw ShapeError("LpLstmParams: bias size");
    };
    check_kernel(w_f);
    check_kernel(w_i);
    check_kernel(w_o);
    check_kernel(w_c);
    check_rec(w_rec_f);
    check_rec(w_rec_i);
    check_rec(w_rec_o);
    check_rec(w_rec_c);
    check_bias(b_f);
    check_bias(b_i);
    check_bias(b_o);
    check_bias(b_c);
    if (alpha.size() != n) throw ShapeError("LpLstmParams: alpha size");
    check_alpha_range(alpha);
}

std::vector<std::span<double>> LpLstmGrads::tensors() {
    return {
        {d_w_f.data},     {d_w_i.data},     {d_w_o.data},     {d_w_c.data},
        {d_w_rec_f.data}, {d_w_rec_i.data}, {d_w_rec_o.data}, {d_w_rec_c.data},
        {d_b_f.data},     {d_b_i.data},     {d_b_o.data},     {d_b_c.data},
    };
}

std::vector<Vector> lplstm_forward(const LpLstmParams& params, const std::vector<Vector>& x_seq,
                                   const Vector& h0, const Vector& c0, LpLstmTrace* trace) {
    params.validate();
    const std::size_t n = params.hidden();
    if (h0.size() != n || c0.size() != n) throw ShapeError("lplstm_forward: state size");

    if (trace) {
        *trace = LpLstmTrace{};
        trace->h0 = h0;
        trace->c0 = c0;
    }

    auto gate_pre = [&](const Matrix& w, const Matrix& w_rec, const Vector& b, const Vector& x,
                        const Vector& h_prev) {
        Vector z = matvec(w_rec, h_prev);
        const Vector zin = matvec(w, x);
        for (std::size_t i = 0; i < n; ++i) z[i] += zin[i] + b[i];
        return z;
    };

    std::vector<Vector> outputs;
    outputs.reserve(x_seq.size());
    Vector h_prev = h0;
    Vector c_prev = c0;
    for (const Vector& xt : x_seq) {
        if (xt.size() != params.input()) throw ShapeError("lplstm_forward: input size");
        Vector f = sigmoid_vec(gate_pre(params.w_f, params.w_rec_f, params.b_f, xt, h_prev));
        Vector i = sigmoid_vec(gate_pre(params.w_i, params.w_rec_i, params.b_i, xt, h_prev));
        Vector o = sigmoid_vec(gate_pre(params.w_o, params.w_rec_o, params.b_o, xt, h_prev));
        Vector zc = gate_pre(params.w_c, params.w_rec_c, params.b_c, xt, h_prev);
        Vector g = activate(zc, params.state_activation);

        Vector c(n);
        for (std::size_t k = 0; k < n; ++k) c[k] = f[k] * c_prev[k] + i[k] * g[k];
        Vector ac = activate(c, params.output_activation);
        Vector hbar(n);
        for (std::size_t k = 0; k < n; ++k) hbar[k] = o[k] * ac[k];
        Vector h(n);
        for (std::size_t k = 0; k < n; ++k)
            h[k] = params.alpha[k] * h_prev[k] + (1.0 - params.alpha[k]) * hbar[k];

        if (trace) {
            trace->x.push_back(xt);
            trace->f.push_back(f);
            trace->i.push_back(i);
            trace->o.push_back(o);
            trace->zc.push_back(zc);
            trace->g.push_back(g);
            trace->c.push_back(c);
            trace->ac.push_back(ac);
            trace->hbar.push_back(hbar);
            trace->h.push_back(h);
        }
        outputs.push_back(h);
        h_prev = std::move(h);
        c_prev = std::move(c);
    }
    return outputs;
}

LpLstmGrads lplstm_backward(const LpLstmParams& params, const LpLstmTrace& trace,
                            const std::vector<Vector>& dL_dh_seq) {
    params.validate();
    const std::size_t n = params.hidden();
    const std::size_t steps = trace.steps();
    if (dL_dh_seq.size() != steps) throw ShapeError("lplstm_backward: upstream length mismatch");

    LpLstmGrads grads;
    grads.d_w_f = Matrix(n, params.input());
    grads.d_w_i = Matrix(n, params.input());
    grads.d_w_o = Matrix(n, params.input());
    grads.d_w_c = Matrix(n, params.input());
    grads.d_w_rec_f = Matrix(n, n);
    grads.d_w_rec_i = Matrix(n, n);
    grads.d_w_rec_o = Matrix(n, n);
    grads.d_w_rec_c = Matrix(n, n);
    grads.d_b_f = Vector(n);
    grads.d_b_i = Vector(n);
    grads.d_b_o = Vector(n);
    grads.d_b_c = Vector(n);

    Vector carry_h(n, 0.0);
    Vector carry_c(n, 0.0);
    Vector dzf(n), dzi(n), dzo(n), dzg(n);
    for (std::size_t t = steps; t-- > 0;) {
        if (dL_dh_seq[t].size() != n) throw ShapeError("lplstm_backward: upstream size mismatch");
        const Vector& h_prev = (t == 0) ? trace.h0 : trace.h[t - 1];
        const Vector& c_prev = (t == 0) ? trace.c0 : trace.c[t - 1];

        Vector delta_h = add(dL_dh_seq[t], carry_h);
        for (std::size_t k = 0; k < n; ++k) {
            const double a = params.alpha[k];
            const double d_hbar = delta_h[k] * (1.0 - a);
            const double f = trace.f[t][k];
            const double i = trace.i[t][k];
            const double o = trace.o[t][k];
            const double dc = d_hbar * o *
                                  activation_grad(params.output_activation, trace.c[t][k],
                                                  trace.ac[t][k]) +
                              carry_c[k];
            dzo[k] = d_hbar * trace.ac[t][k] * o * (1.0 - o);
            dzf[k] = dc * c_prev[k] * f * (1.0 - f);
            dzi[k] = dc * trace.g[t][k] * i * (1.0 - i);
            dzg[k] = dc * i *
                     activation_grad(params.state_activation, trace.zc[t][k], trace.g[t][k]);
            carry_c[k] = dc * f;
        }

        add_outer(grads.d_w_f, dzf, trace.x[t]);
        add_outer(grads.d_w_i, dzi, trace.x[t]);
        add_outer(grads.d_w_o, dzo, trace.x[t]);
        add_outer(grads.d_w_c, dzg, trace.x[t]);
        add_outer(grads.d_w_rec_f, dzf, h_prev);
        add_outer(grads.d_w_rec_i, dzi, h_prev);
        add_outer(grads.d_w_rec_o, dzo, h_prev);
        add_outer(grads.d_w_rec_c, dzg, h_prev);
        for (std::size_t k = 0; k < n; ++k) {
            grads.d_b_f[k] += dzf[k];
            grads.d_b_i[k] += dzi[k];
            grads.d_b_o[k] += dzo[k];
            grads.d_b_c[k] += dzg[k];
        }

        Vector next_carry = matvec_transposed(params.w_rec_f, dzf);
        {
            const Vector ti = matvec_transposed(params.w_rec_i, dzi);
            const Vector to = matvec_transposed(params.w_rec_o, dzo);
            const Vector tc = matvec_transposed(params.w_rec_c, dzg);
            for (std::size_t k = 0; k < n; ++k)
                next_carry[k] += ti[k] + to[k] + tc[k] + params.alpha[k] * delta_h[k];
        }
        carry_h = std::move(next_carry);
    }
    return grads;
}

// ---- dense + losses --------------------------------------------------------------------

std::vector<std::span<double>> DenseGrads::tensors() { return {{d_w.data}, {d_b.data}}; }

Vector dense_forward(const Dense& layer, const Vector& x) {
    Vector y = matvec(layer.w, x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += layer.b[i];
    return y;
}

Vector dense_backward(const Dense& layer, const Vector& x, const Vector& d_y, DenseGrads& acc) {
    if (acc.d_w.rows != layer.w.rows || acc.d_w.cols != layer.w.cols)
        throw ShapeError("dense_backward: grad accumulator shape");
    add_outer(acc.d_w, d_y, x);
    for (std::size_t i = 0; i < d_y.size(); ++i) acc.d_b[i] += d_y[i];
    return matvec_transposed(layer.w, d_y);
}

LossGrad mse_loss(const Vector& pred, const Vector& target) {
    if (pred.size() != target.size()) throw ShapeError("mse_loss: length mismatch");
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    LossGrad out;
    out.grad = Vector(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double diff = pred[i] - target[i];
        out.loss += diff * diff * inv_n;
        out.grad[i] = 2.0 * diff * inv_n;
    }
    return out;
}

LossGrad softmax_xent(const Vector& logits, std::size_t target_class) {
    if (target_class >= logits.size()) throw DomainError("softmax_xent: class index out of range");
    double max_logit = logits[0];
    for (double v : logits.data) max_logit = std::max(max_logit, v);
    double denom = 0.0;
    Vector p(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - max_logit);
        denom += p[i];
    }
    LossGrad out;
    out.grad = Vector(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] /= denom;
        out.grad[i] = p[i];
    }
    out.grad[target_class] -= 1.0;
    out.loss = -std::log(std::max(p[target_class], 1e-300));
    return out;
}

SeqLossGrad softmax_xent_seq(const std::vector<Vector>& logits_seq,
                             const std::vector<std::size_t>& target_classes) {
    if (logits_seq.size() != target_classes.size())
        throw ShapeError("softmax_xent_seq: sequence length mismatch");
    SeqLossGrad out;
    if (logits_seq.empty()) return out;
    const double inv_t = 1.0 / static_cast<double>(logits_seq.size());
    out.grad.reserve(logits_seq.size());
    for (std::size_t t = 0; t < logits_seq.size(); ++t) {
        LossGrad step = softmax_xent(logits_seq[t], target_classes[t]);
        out.loss += step.loss * inv_t;
        out.grad.push_back(scale(step.grad, inv_t));
    }
    return out;
}

// ---- init --------------------------------------------------------------------------------

Matrix glorot_uniform(std::size_t rows, std::size_t cols, SeededRng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(-limit, limit);
    return m;
}

Matrix recurrent_gaussian(std::size_t n, SeededRng& rng) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Matrix m(n, n);
    for (double& v : m.data) v = rng.normal() * scale;
    return m;
}

Vector sample_alpha(std::size_t n, const AlphaConfig& config, SeededRng& rng) {
    Vector alpha(n);
    if (config.mode == AlphaConfig::Mode::Constant) {
        if (!(config.value >= 0.0 && config.value <= 1.0))
            throw DomainError("sample_alpha: constant alpha outside [0,1]");
        for (double& a : alpha.data) a = config.value;
        return alpha;
    }
    if (!(config.tau_min >= 1.0 && config.tau_max >= config.tau_min))
        throw DomainError("sample_alpha: invalid tau range");
    const double log_lo = std::log(config.tau_min);
    const double log_hi = std::log(config.tau_max);
    for (double& a : alpha.data) {
        const double tau = std::exp(rng.uniform(log_lo, log_hi));
        a = std::exp(-1.0 / tau);
    }
    return alpha;
}

LpRnnParams init_lprnn(std::size_t hidden, std::size_t input, Activation act,
                       const AlphaConfig& alpha_cfg, SeededRng& rng) {
    LpRnnParams p;
    SeededRng w_rng = rng.split(1);
    SeededRng a_rng = rng.split(2);
    p.w_in = glorot_uniform(hidden, input, w_rng);
    p.w_rec = recurrent_gaussian(hidden, w_rng);
    p.b = Vector(hidden, 0.0);
    p.alpha = sample_alpha(hidden, alpha_cfg, a_rng);
    p.activation = act;
    return p;
}

LpLstmParams init_lplstm(std::size_t hidden, std::size_t input, Activation state_act,
                         Activation output_act, const AlphaConfig& alpha_cfg, SeededRng& rng) {
    LpLstmParams p;
    SeededRng w_rng = rng.split(1);
    SeededRng a_rng = rng.split(2);
    p.w_f = glorot_uniform(hidden, input, w_rng);
    p.w_i = glorot_uniform(hidden, input, w_rng);
    p.w_o = glorot_uniform(hidden, input, w_rng);
    p.w_c = glorot_uniform(hidden, input, w_rng);
    p.w_rec_f = recurrent_gaussian(hidden, w_rng);
    p.w_rec_i = recurrent_gaussian(hidden, w_rng);
    p.w_rec_o = recurrent_gaussian(hidden, w_rng);
    p.w_rec_c = recurrent_gaussian(hidden, w_rng);
    // Forget bias starts at 1 so early training does not erase the cell state.
    p.b_f = Vector(hidden, 1.0);
    p.b_i = Vector(hidden, 0.0);
    p.b_o = Vector(hidden, 0.0);
    p.b_c = Vector(hidden, 0.0);
    p.alpha = sample_alpha(hidden, alpha_cfg, a_rng);
    p.state_activation = state_act;
    p.output_activation = output_act;
    return p;
}

Dense init_dense(std::size_t out, std::size_t in, SeededRng& rng) {
    Dense d;
    d.w = glorot_uniform(out, in, rng);
    d.b = Vector(out, 0.0);
    return d;
}

// ---- gradient check ------------------------------------------------------------------------

const char* grad_check_target_name(GradCheckTarget t) {
    switch (t) {
        case GradCheckTarget::SimpleRnn: return "simple_rnn";
        case GradCheckTarget::LpRnn: return "lprnn";
        case GradCheckTarget::Lstm: return "lstm";
        case GradCheckTarget::LpLstm: return "lplstm";
        case GradCheckTarget::DenseSoftmax: return "dense_softmax";
    }
    return "?";
}

namespace {

std::vector<Vector> random_sequence(std::size_t len, std::size_t dim, SeededRng& rng) {
    std::vector<Vector> seq;
    seq.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
        Vector v(dim);
        for (double& x : v.data) x = rng.uniform(-1.0, 1.0);
        seq.push_back(std::move(v));
    }
    return seq;
}

double worst_relative_error(std::span<std::span<double>> params,
                            std::span<std::span<double>> analytic, double epsilon,
                            const std::function<double()>& loss_fn) {
    double worst = 0.0;
    for (std::size_t ti = 0; ti < params.size(); ++ti) {
        for (std::size_t k = 0; k < params[ti].size(); ++k) {
            double& p = params[ti][k];
            const double backup = p;
            p = backup + epsilon;
            const double up = loss_fn();
            p = backup - epsilon;
            const double down = loss_fn();
            p = backup;
            const double numeric = (up - down) / (2.0 * epsilon);
            const double ana = analytic[ti][k];
            const double denom = std::max({std::abs(ana), std::abs(numeric), 1e-12});
            worst = std::max(worst, std::abs(ana - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace

double gradient_check(GradCheckTarget target, std::size_t hidden, std::size_t input,
                      std::size_t seq_len, std::uint64_t seed, double epsilon,
                      bool trainable_alpha) {
    if (!(epsilon > 0.0 && epsilon <= 1e-3))
        throw DomainError("gradient_check: epsilon outside (0, 1e-3]");
    SeededRng rng(seed, 0x6AD);
    // Smooth (tanh) activations keep the finite-difference comparison exact;
    // the relu paths share the same chain rule and are covered by unit tests.
    const auto x_seq = random_sequence(seq_len, input, rng);

    if (target == GradCheckTarget::DenseSoftmax) {
        const std::size_t classes = hidden;
        Dense layer = init_dense(classes, input, rng);
        std::vector<std::size_t> targets(seq_len);
        for (auto& c : targets) c = rng.uniform_int(classes);

        auto loss_fn = [&]() {
            std::vector<Vector> logits;
            logits.reserve(seq_len);
            for (const auto& x : x_seq) logits.push_back(dense_forward(layer, x));
            return softmax_xent_seq(logits, targets).loss;
        };
        DenseGrads acc{Matrix(classes, input), Vector(classes)};
        {
            std::vector<Vector> logits;
            logits.reserve(seq_len);
            for (const auto& x : x_seq) logits.push_back(dense_forward(layer, x));
            const SeqLossGrad lg = softmax_xent_seq(logits, targets);
            for (std::size_t t = 0; t < seq_len; ++t)
                dense_backward(layer, x_seq[t], lg.grad[t], acc);
        }
        std::vector<std::span<double>> params{{layer.w.data}, {layer.b.data}};
        auto analytic = acc.tensors();
        return worst_relative_error(params, analytic, epsilon, loss_fn);
    }

    if (target == GradCheckTarget::SimpleRnn || target == GradCheckTarget::LpRnn) {
        AlphaConfig acfg;
        if (target == GradCheckTarget::SimpleRnn) {
            acfg.mode = AlphaConfig::Mode::Constant;
            acfg.value = 0.0;
        } else {
            acfg.tau_min = 1.0;
            acfg.tau_max = 10.0;  // alpha in [0.37, 0.90]: every unit stays responsive
        }
        LpRnnParams cell = init_lprnn(hidden, input, Activation::Tanh, acfg, rng);
        if (trainable_alpha) {
            cell.train_alpha = true;
            cell.alpha_logit = Vector(hidden);
            for (std::size_t k = 0; k < hidden; ++k)
                cell.alpha_logit[k] = std::log(cell.alpha[k] / (1.0 - cell.alpha[k] + 1e-12));
        }
        const Vector y0(hidden, 0.0);
        const auto target_seq = random_sequence(seq_len, hidden, rng);

        auto loss_fn = [&]() {
            const auto y = lprnn_forward(cell, x_seq, y0);
            double loss = 0.0;
            for (std::size_t t = 0; t < seq_len; ++t) loss += mse_loss(y[t], target_seq[t]).loss;
            return loss;
        };
        LpRnnTrace trace;
        lprnn_forward(cell, x_seq, y0, &trace);
        std::vector<Vector> upstream(seq_len);
        for (std::size_t t = 0; t < seq_len; ++t)
            upstream[t] = mse_loss(trace.y[t], target_seq[t]).grad;
        LpRnnGrads grads = lprnn_backward(cell, trace, upstream);

        std::vector<std::span<double>> params{
            {cell.w_in.data}, {cell.w_rec.data}, {cell.b.data}};
        if (trainable_alpha) params.push_back({cell.alpha_logit.data});
        auto analytic = grads.tensors();
        return worst_relative_error(params, analytic, epsilon, loss_fn);
    }

    // LSTM family
    AlphaConfig acfg;
    if (target == GradCheckTarget::Lstm) {
        acfg.mode = AlphaConfig::Mode::Constant;
        acfg.value = 0.0;
    } else {
        acfg.tau_min = 1.0;
        acfg.tau_max = 10.0;
    }
    LpLstmParams cell =
        init_lplstm(hidden, input, Activation::Tanh, Activation::Tanh, acfg, rng);
    const Vector h0(hidden, 0.0), c0(hidden, 0.0);
    const auto target_seq = random_sequence(seq_len, hidden, rng);

    auto loss_fn = [&]() {
        const auto h = lplstm_forward(cell, x_seq, h0, c0);
        double loss = 0.0;
        for (std::size_t t = 0; t < seq_len; ++t) loss += mse_loss(h[t], target_seq[t]).loss;
        return loss;
    };
    LpLstmTrace trace;
    lplstm_forward(cell, x_seq, h0, c0, &trace);
    std::vector<Vector> upstream(seq_len);
    for (std::size_t t = 0; t < seq_len; ++t) upstream[t] = mse_loss(trace.h[t], target_seq[t]).grad;
    LpLstmGrads grads = lplstm_backward(cell, trace, upstream);

    std::vector<std::span<double>> params{
        {cell.w_f.data},     {cell.w_i.data},     {cell.w_o.data},     {cell.w_c.data},
        {cell.w_rec_f.data}, {cell.w_rec_i.data}, {cell.w_rec_o.data}, {cell.w_rec_c.data},
        {cell.b_f.data},     {cell.b_i.data},     {cell.b_o.data},     {cell.b_c.data}};
    auto analytic = grads.tensors();
    return worst_relative_error(params, analytic, epsilon, loss_fn);
}

}  // namespace lprnn
