#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lprnn/numerics.hpp"

namespace lprnn {

// ---- low-pass RNN cell ---------------------------------------------------------------

/// Parameters of a low-pass RNN cell:
///   y_t = alpha (*) y_{t-1} + (1 - alpha) (*) sigma(w_rec y_{t-1} + w_in x_t + b)
/// alpha = 0 recovers a plain simple RNN step, alpha = 1 freezes the state.
/// alpha is a fixed buffer by default; with train_alpha the cell reparameterizes
/// alpha = sigmoid(alpha_logit) and exposes a gradient for the logits.
struct LpRnnParams {
    Matrix w_in;   // [hidden x input]
    Matrix w_rec;  // [hidden x hidden]
    Vector b;      // [hidden]
    Vector alpha;  // [hidden], retention ratios in [0,1]
    Activation activation = Activation::Tanh;
    bool train_alpha = false;
    Vector alpha_logit;  // only meaningful when train_alpha

    std::size_t hidden() const { return w_rec.rows; }
    std::size_t input() const { return w_in.cols; }
    /// alpha, or sigmoid(alpha_logit) in trainable mode.
    Vector effective_alpha() const;
    void validate() const;
};

/// Per-timestep cache for exact backpropagation through time. Holds everything
/// the backward pass needs; replaying the update from the cached values
/// reproduces the stored outputs bit for bit.
struct LpRnnTrace {
    Vector y0;
    std::vector<Vector> x;       // inputs
    std::vector<Vector> preact;  // w_rec y_{t-1} + w_in x_t + b
    std::vector<Vector> act;     // sigma(preact)
    std::vector<Vector> y;       // filtered outputs

    std::size_t steps() const { return y.size(); }
};

struct LpRnnGrads {
    Matrix d_w_in;
    Matrix d_w_rec;
    Vector d_b;
    Vector d_alpha_logit;  // empty unless the cell trains alpha

    std::vector<std::span<double>> tensors();
};

std::vector<Vector> lprnn_forward(const LpRnnParams& params, const std::vector<Vector>& x_seq,
                                  const Vector& y0, LpRnnTrace* trace = nullptr);

LpRnnGrads lprnn_backward(const LpRnnParams& params, const LpRnnTrace& trace,
                          const std::vector<Vector>& dL_dy_seq);

// ---- low-pass LSTM cell ----------------------------------------------------------------

/// LSTM with a first-order low-pass filter on the emitted output:
///   f/i/o gates: sigmoid;  c_t = f (*) c_{t-1} + i (*) A(zc);
///   hbar_t = o (*) B(c_t);  h_t = alpha (*) h_{t-1} + (1 - alpha) (*) hbar_t
/// A = state_activation, B = output_activation (relu or tanh). alpha = 0 gives
/// the plain LSTM.
struct LpLstmParams {
    Matrix w_f, w_i, w_o, w_c;                  // [hidden x input]
    Matrix w_rec_f, w_rec_i, w_rec_o, w_rec_c;  // [hidden x hidden]
    Vector b_f, b_i, b_o, b_c;                  // [hidden]
    Vector alpha;
    Activation state_activation = Activation::Relu;
    Activation output_activation = Activation::Relu;

    std::size_t hidden() const { return w_rec_c.rows; }
    std::size_t input() const { return w_c.cols; }
    void validate() const;
};

struct LpLstmTrace {
    Vector h0, c0;
    std::vector<Vector> x;
    std::vector<Vector> f, i, o;  // gate values (post-sigmoid)
    std::vector<Vector> zc;       // cell-candidate pre-activation
    std::vector<Vector> g;        // state_activation(zc)
    std::vector<Vector> c;        // cell state
    std::vector<Vector> ac;       // output_activation(c)
    std::vector<Vector> hbar;     // unfiltered output
    std::vector<Vector> h;        // filtered output

    std::size_t steps() const { return h.size(); }
};

struct LpLstmGrads {
    Matrix d_w_f, d_w_i, d_w_o, d_w_c;
    Matrix d_w_rec_f, d_w_rec_i, d_w_rec_o, d_w_rec_c;
    Vector d_b_f, d_b_i, d_b_o, d_b_c;

    std::vector<std::span<double>> tensors();
};

std::vector<Vector> lplstm_forward(const LpLstmParams& params, const std::vector<Vector>& x_seq,
                                   const Vector& h0, const Vector& c0,
                                   LpLstmTrace* trace = nullptr);

LpLstmGrads lplstm_backward(const LpLstmParams& params, const LpLstmTrace& trace,
                            const std::vector<Vector>& dL_dh_seq);

// ---- dense readout ---------------------------------------------------------------------

struct Dense {
    Matrix w;  // [out x in]
    Vector b;  // [out]

    std::size_t out() const { return w.rows; }
    std::size_t in() const { return w.cols; }
};

struct DenseGrads {
    Matrix d_w;
    Vector d_b;

    std::vector<std::span<double>> tensors();
};

Vector dense_forward(const Dense& layer, const Vector& x);
/// Accumulates parameter gradients into `acc` and returns dL/dx.
Vector dense_backward(const Dense& layer, const Vector& x, const Vector& d_y, DenseGrads& acc);

// ---- losses ----------------------------------------------------------------------------

struct LossGrad {
    double loss = 0.0;
    Vector grad;  // same shape as the prediction / logits
};

/// Mean squared error over all elements; grad = 2 (pred - target) / n.
LossGrad mse_loss(const Vector& pred, const Vector& target);

/// Cross entropy of a stabilized softmax against one target class.
LossGrad softmax_xent(const Vector& logits, std::size_t target_class);

struct SeqLossGrad {
    double loss = 0.0;                // mean over timesteps
    std::vector<Vector> grad;         // per-step dL/dlogits
};

/// Per-step softmax cross entropy averaged over the sequence.
SeqLossGrad softmax_xent_seq(const std::vector<Vector>& logits_seq,
                             const std::vector<std::size_t>& target_classes);

// ---- initialization ---------------------------------------------------------------------

/// Glorot-uniform fan-in/fan-out initialization for input and gate kernels.
Matrix glorot_uniform(std::size_t rows, std::size_t cols, SeededRng& rng);
/// Gaussian recurrent kernel scaled by 1/sqrt(n) (unit-ish spectral radius).
Matrix recurrent_gaussian(std::size_t n, SeededRng& rng);

struct AlphaConfig {
    enum class Mode { LogUniformTau, Constant };
    Mode mode = Mode::LogUniformTau;
    double tau_min = 1.0;    // steps
    double tau_max = 200.0;  // steps
    double value = 0.0;      // only for Constant
};

/// Per-unit retention ratios alpha = exp(-1/tau), tau log-uniform in
/// [tau_min, tau_max] steps (or a shared constant).
Vector sample_alpha(std::size_t n, const AlphaConfig& config, SeededRng& rng);

LpRnnParams init_lprnn(std::size_t hidden, std::size_t input, Activation act,
                       const AlphaConfig& alpha_cfg, SeededRng& rng);
LpLstmParams init_lplstm(std::size_t hidden, std::size_t input, Activation state_act,
                         Activation output_act, const AlphaConfig& alpha_cfg, SeededRng& rng);
Dense init_dense(std::size_t out, std::size_t in, SeededRng& rng);

// ---- gradient checking --------------------------------------------------------------------

enum class GradCheckTarget { SimpleRnn, LpRnn, Lstm, LpLstm, DenseSoftmax };

const char* grad_check_target_name(GradCheckTarget t);

/// Compares analytic BPTT gradients against central finite differences on a
/// random instance; returns the worst |g_a - g_n| / max(|g_a|, |g_n|, 1e-12).
double gradient_check(GradCheckTarget target, std::size_t hidden, std::size_t input,
                      std::size_t seq_len, std::uint64_t seed, double epsilon,
                      bool trainable_alpha = false);

}  // namespace lprnn
