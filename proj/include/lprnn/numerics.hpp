#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "lprnn/common.hpp"

namespace lprnn {

/// Dense double-precision vector.
struct Vector {
    std::vector<double> data;

    Vector() = default;
    explicit Vector(std::size_t n, double fill = 0.0) : data(n, fill) {}
    Vector(std::initializer_list<double> xs) : data(xs) {}

    std::size_t size() const { return data.size(); }
    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    double* begin() { return data.data(); }
    double* end() { return data.data() + data.size(); }
    const double* begin() const { return data.data(); }
    const double* end() const { return data.data() + data.size(); }

    bool operator==(const Vector&) const = default;
};

/// Dense double-precision matrix, row-major storage.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double* row(std::size_t i) { return data.data() + i * cols; }

    static Matrix identity(std::size_t n);

    bool operator==(const Matrix&) const = default;
};

/// Splittable counter-seeded generator (xoshiro256++ core, splitmix64 seeding).
/// Identical (seed, stream) pairs always produce the identical sequence;
/// distinct stream ids give statistically independent streams.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();

    /// Uniform in [0, 1).
    double uniform01();
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi);
    /// Standard normal (Box-Muller, second draw cached).
    double normal();
    /// Uniform integer in [0, n). Requires n >= 1.
    std::uint64_t uniform_int(std::uint64_t n);

    /// Derived generator: same seed, stream mixed with `tag`.
    /// Used to hand out independent streams for tasks, weights, alpha, ...
    SeededRng split(std::uint64_t tag) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    std::uint64_t state_[4];
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

enum class Activation { Identity, Relu, Sigmoid, Tanh };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// ---- elementwise / linear algebra -------------------------------------------------

Matrix matmul(const Matrix& a, const Matrix& b);

/// a * x for a [m x n] matrix and length-n vector.
Vector matvec(const Matrix& a, const Vector& x);
/// a^T * x for a [m x n] matrix and length-m vector.
Vector matvec_transposed(const Matrix& a, const Vector& x);
/// acc += d * x^T (outer product accumulation; acc is [d.size() x x.size()]).
void add_outer(Matrix& acc, const Vector& d, const Vector& x);

Vector hadamard(const Vector& a, const Vector& b);

Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scale(const Vector& a, double c);
Matrix scale(const Matrix& a, double c);
double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);

double apply_activation(Activation kind, double z);
/// Derivative of the activation given pre-activation z and activation value a.
double activation_grad(Activation kind, double z, double a);

Vector activate(const Vector& v, Activation kind);
/// Elementwise derivative, given pre-activations z and activations a = activate(z).
Vector activate_grad(const Vector& z, const Vector& a, Activation kind);

// ---- spectral utilities ------------------------------------------------------------

struct SpectralEstimate {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Dominant eigenvalue magnitude via power iteration on w itself (no w^T w).
/// A complex dominant pair is handled by fitting the two-step Krylov recurrence
/// w^2 v = a (w v) + b v and taking the root magnitude. `converged` reports
/// whether successive estimates settled within `tol`; if not, the best
/// estimate so far is returned with converged = false.
SpectralEstimate spectral_radius(const Matrix& w, int max_iters = 20000, double tol = 1e-12);

/// w scaled so the re-measured spectral radius lands on `target` (within ~1e-6).
Matrix scale_to_spectral_radius(const Matrix& w, double target);

/// First-order low-pass: y_t = alpha (*) y_{t-1} + (1 - alpha) (*) x_t.
/// Pure linear filter; alpha entries must lie in [0,1].
std::vector<Vector> lowpass_signal(const std::vector<Vector>& x, const Vector& alpha,
                                   const Vector& y0);
/// Scalar-series convenience overload.
std::vector<double> lowpass_signal(const std::vector<double>& x, double alpha, double y0);

struct ClipResult {
    double applied_scale = 1.0;
    double norm = 0.0;
};

/// Scales every tensor in place by max_norm / ||g||_2 when the joint norm exceeds
/// max_norm; otherwise leaves them untouched. Returns the scale it applied.
ClipResult clip_global_norm(std::span<std::span<double>> tensors, double max_norm);

// ---- small dense solvers (internal plumbing) ---------------------------------------

/// Solves a x = b by LU with partial pivoting. Throws DegenerateInputError when
/// a is (numerically) singular.
Vector solve_linear(Matrix a, Vector b);
/// Column-wise variant: solves a X = B.
Matrix solve_linear(Matrix a, Matrix b);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

}  // namespace lprnn
