#include "lprnn/esn.hpp"

namespace lprnn {

LpRnnParams EsnParams::as_cell() const {
    LpRnnParams cell;
    cell.w_in = w_in;
    cell.w_rec = w_rec;
    cell.b = Vector(hidden(), 0.0);
    cell.alpha = alpha;
    cell.activation = activation;
    return cell;
}

EsnParams esn_init(std::size_t n_hidden, std::size_t n_input, double rho_target,
                   const AlphaConfig& alpha_cfg, SeededRng& rng, std::size_t n_output,
                   double input_scale) {
    if (n_hidden < 1) throw DomainError("esn_init: need at least one hidden unit");
    if (!(rho_target > 0.0 && rho_target <= 1.0))
        throw DomainError("esn_init: rho_target must lie in (0,1]");

    SeededRng w_rng = rng.split(1);
    SeededRng a_rng = rng.split(2);

    EsnParams params;
    params.w_in = Matrix(n_hidden, n_input);
    for (double& v : params.w_in.data) v = w_rng.normal() * input_scale;
    Matrix w_rec(n_hidden, n_hidden);
    for (double& v : w_rec.data) v = w_rng.normal();
    params.w_rec = scale_to_spectral_radius(w_rec, rho_target);
    params.alpha = sample_alpha(n_hidden, alpha_cfg, a_rng);
    params.readout.w = Matrix(n_output, n_hidden, 0.0);
    params.readout.b = Vector(n_output, 0.0);
    params.rho_target = rho_target;
    return params;
}

std::vector<Vector> esn_states(const EsnParams& params, const std::vector<Vector>& x_seq) {
    return lprnn_forward(params.as_cell(), x_seq, Vector(params.hidden(), 0.0));
}

namespace {

Dense ridge_readout(const std::vector<Vector>& states, const std::vector<Vector>& targets,
                    double lambda) {
    const std::size_t n = states[0].size();
    const std::size_t out = targets[0].size();
    const std::size_t dim = n + 1;  // bias column

    // Normal equations on the bias-augmented design matrix.
    Matrix gram(dim, dim, 0.0);
    Matrix rhs(dim, out, 0.0);
    Vector row(dim);
    for (std::size_t t = 0; t < states.size(); ++t) {
        if (states[t].size() != n || targets[t].size() != out)
            throw ShapeError("train_readout: ragged states or targets");
        for (std::size_t i = 0; i < n; ++i) row[i] = states[t][i];
        row[n] = 1.0;
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = i; j < dim; ++j) gram(i, j) += row[i] * row[j];
            for (std::size_t o = 0; o < out; ++o) rhs(i, o) += row[i] * targets[t][o];
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < i; ++j) gram(i, j) = gram(j, i);
        gram(i, i) += lambda;
    }

    const Matrix solution = solve_linear(gram, rhs);  // [dim x out]
    Dense readout{Matrix(out, n), Vector(out)};
    for (std::size_t o = 0; o < out; ++o) {
        for (std::size_t i = 0; i < n; ++i) readout.w(o, i) = solution(i, o);
        readout.b[o] = solution(n, o);
    }
    return readout;
}

Dense sgd_readout(const std::vector<Vector>& states, const std::vector<Vector>& targets,
                  const OptimizerConfig& opt, std::size_t epochs) {
    opt.validate();
    const std::size_t n = states[0].size();
    const std::size_t out = targets[0].size();
    Dense readout{Matrix(out, n, 0.0), Vector(out, 0.0)};

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t t = 0; t < states.size(); ++t) {
            if (states[t].size() != n || targets[t].size() != out)
                throw ShapeError("train_readout: ragged states or targets");
            const Vector pred = dense_forward(readout, states[t]);
            const LossGrad lg = mse_loss(pred, targets[t]);
            DenseGrads grads{Matrix(out, n, 0.0), Vector(out, 0.0)};
            dense_backward(readout, states[t], lg.grad, grads);

            std::vector<std::span<double>> p{{readout.w.data}, {readout.b.data}};
            auto g = grads.tensors();
            clip_global_norm(std::span<std::span<double>>(g), opt.clip_norm);
            sgd_step(std::span<std::span<double>>(p), std::span<std::span<double>>(g),
                     opt.learning_rate);
        }
    }
    return readout;
}

}  // namespace

Dense train_readout(const std::vector<Vector>& states, const std::vector<Vector>& targets,
                    const ReadoutMethod& method) {
    if (states.empty() || states.size() != targets.size())
        throw ShapeError("train_readout: states and targets must align");
    if (method.kind == ReadoutMethod::Kind::Ridge)
        return ridge_readout(states, targets, method.ridge_lambda);
    return sgd_readout(states, targets, method.sgd, method.sgd_epochs);
}

}  // namespace lprnn
