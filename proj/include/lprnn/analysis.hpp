#pragma once

#include <cstddef>
#include <vector>

#include "lprnn/numerics.hpp"

namespace lprnn {

/// A real eigenvalue of w^T together with its unit-norm eigenvector.
struct EigenPair {
    double value = 0.0;
    Vector vector;
};

/// The affine spectral map (1 - alpha) * lambda + alpha applied by low-pass
/// filtering to every recurrent Jacobian eigenvalue.
double eigen_shift(double lambda, double alpha);

/// ((1 - alpha) w_rec^T + alpha I)^l by repeated squaring. This is the factor
/// the chain rule contributes per l steps of the linearized recurrence.
Matrix jacobian_power_factor(const Matrix& w_rec, double alpha, std::size_t l);

/// Checks ((1 - alpha) w^T + alpha I) v = eigen_shift(lambda, alpha) v for every
/// supplied eigenpair of w^T and returns the worst L2 residual. Pairs whose own
/// residual ||w^T v - lambda v|| exceeds 1e-8 are rejected up front.
double verify_shared_eigenvectors(const Matrix& w, const std::vector<EigenPair>& pairs,
                                  double alpha);

/// Smallest t with alpha^t <= epsilon, i.e. ceil(ln eps / ln alpha).
/// Requires alpha in (0,1) and epsilon in (0,1).
std::size_t memory_horizon(double alpha, double epsilon);

/// Builds w with a planted real spectrum: draws a random basis V, forms
/// w = (V diag(eigenvalues) V^-1)^T, and returns w together with the unit-norm
/// eigenpairs of w^T (the columns of V). Exercises eigen_shift end to end
/// without a general eigensolver.
struct PlantedSpectrum {
    Matrix w;
    std::vector<EigenPair> pairs;
};

PlantedSpectrum planted_spectrum(const Vector& eigenvalues, SeededRng& rng);

}  // namespace lprnn
