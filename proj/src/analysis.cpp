#include "lprnn/analysis.hpp"

#include <cmath>

namespace lprnn {

double eigen_shift(double lambda, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("eigen_shift: alpha outside [0,1]");
    return (1.0 - alpha) * lambda + alpha;
}

namespace {

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

}  // namespace

Matrix jacobian_power_factor(const Matrix& w_rec, double alpha, std::size_t l) {
    if (w_rec.rows != w_rec.cols) throw ShapeError("jacobian_power_factor: matrix not square");
    const std::size_t n = w_rec.rows;

    Matrix base = transpose(w_rec);
    for (double& v : base.data) v *= (1.0 - alpha);
    for (std::size_t i = 0; i < n; ++i) base(i, i) += alpha;

    Matrix result = Matrix::identity(n);
    while (l > 0) {
        if (l & 1) result = matmul(result, base);
        l >>= 1;
        if (l > 0) base = matmul(base, base);
    }
    return result;
}

double verify_shared_eigenvectors(const Matrix& w, const std::vector<EigenPair>& pairs,
                                  double alpha) {
    if (w.rows != w.cols) throw ShapeError("verify_shared_eigenvectors: matrix not square");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw DomainError("verify_shared_eigenvectors: alpha outside [0,1]");

    double worst = 0.0;
    for (const EigenPair& pair : pairs) {
        if (pair.vector.size() != w.rows)
            throw ShapeError("verify_shared_eigenvectors: eigenvector length");
        const Vector wt_v = matvec_transposed(w, pair.vector);
        const Vector input_residual = sub(wt_v, scale(pair.vector, pair.value));
        if (norm2(input_residual) > 1e-8)
            throw PreconditionError("verify_shared_eigenvectors: supplied pair is not an eigenpair of w^T");

        const double shifted = eigen_shift(pair.value, alpha);
        // ((1-a) w^T + a I) v = (1-a) (w^T v) + a v
        Vector lhs = scale(wt_v, 1.0 - alpha);
        for (std::size_t k = 0; k < lhs.size(); ++k) lhs[k] += alpha * pair.vector[k];
        const double residual = norm2(sub(lhs, scale(pair.vector, shifted)));
        worst = std::max(worst, residual);
    }
    return worst;
}

std::size_t memory_horizon(double alpha, double epsilon) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("memory_horizon: alpha must lie strictly inside (0,1)");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw DomainError("memory_horizon: epsilon must lie strictly inside (0,1)");
    return static_cast<std::size_t>(std::ceil(std::log(epsilon) / std::log(alpha)));
}

PlantedSpectrum planted_spectrum(const Vector& eigenvalues, SeededRng& rng) {
    const std::size_t n = eigenvalues.size();
    if (n == 0) throw ShapeError("planted_spectrum: empty spectrum");

    Matrix v(n, n);
    for (double& x : v.data) x = rng.normal();

    // w^T = V diag(lambda) V^-1, assembled as (V diag(lambda)) V^-1.
    Matrix v_scaled = v;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v_scaled(i, j) *= eigenvalues[j];
    const Matrix v_inv = solve_linear(v, Matrix::identity(n));
    const Matrix wt = matmul(v_scaled, v_inv);

    PlantedSpectrum out;
    out.w = transpose(wt);
    out.pairs.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        EigenPair pair;
        pair.value = eigenvalues[j];
        pair.vector = Vector(n);
        for (std::size_t i = 0; i < n; ++i) pair.vector[i] = v(i, j);
        const double nrm = norm2(pair.vector);
        for (double& x : pair.vector.data) x /= nrm;
        out.pairs.push_back(std::move(pair));
    }
    return out;
}

}  // namespace lprnn
