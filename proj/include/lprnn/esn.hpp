#pragma once

#include <cstddef>
#include <vector>

#include "lprnn/cells.hpp"
#include "lprnn/numerics.hpp"
#include "lprnn/training.hpp"

namespace lprnn {

/// Echo-state network: a low-pass RNN whose kernels are drawn once, rescaled to
/// a target spectral radius, and never trained; only the linear readout learns.
struct EsnParams {
    Matrix w_in;   // fixed
    Matrix w_rec;  // fixed, spectral radius == rho_target
    Vector alpha;  // fixed
    Dense readout;
    Activation activation = Activation::Tanh;
    double rho_target = 0.95;

    std::size_t hidden() const { return w_rec.rows; }
    std::size_t input() const { return w_in.cols; }
    /// The equivalent untrained cell (zero bias).
    LpRnnParams as_cell() const;
};

/// Gaussian kernels; w_rec rescaled via scale_to_spectral_radius. `input_scale`
/// multiplies the input kernel (it controls how far the reservoir is driven
/// into the tanh and, downstream, how much headroom the spike coder needs).
EsnParams esn_init(std::size_t n_hidden, std::size_t n_input, double rho_target,
                   const AlphaConfig& alpha_cfg, SeededRng& rng, std::size_t n_output = 1,
                   double input_scale = 1.0);

/// Reservoir state trajectory from a zero start; the readout plays no part.
std::vector<Vector> esn_states(const EsnParams& params, const std::vector<Vector>& x_seq);

struct ReadoutMethod {
    enum class Kind { Ridge, Sgd };
    Kind kind = Kind::Ridge;
    double ridge_lambda = 1e-6;
    OptimizerConfig sgd;
    std::size_t sgd_epochs = 20;
};

/// Linear map from states to targets minimizing mse. Ridge solves the normal
/// equations (S^T S + lambda I) w = S^T y with a bias column; sgd makes
/// per-step descent passes in a fixed order. Callers discard any washout
/// before passing states.
Dense train_readout(const std::vector<Vector>& states, const std::vector<Vector>& targets,
                    const ReadoutMethod& method);

}  // namespace lprnn
