#include "lprnn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lprnn {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

// ---- SeededRng ----------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
    // Mix seed and stream through two splitmix64 rounds so that nearby
    // (seed, stream) pairs land in unrelated states.
    std::uint64_t s = seed;
    std::uint64_t mixed = splitmix64(s) ^ (stream * 0xD2B74407B1CE6E93ULL + 0x8BB84B93962EACC9ULL);
    for (auto& word : state_) word = splitmix64(mixed);
}

std::uint64_t SeededRng::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double SeededRng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double SeededRng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // Box-Muller; u1 nudged away from zero so log() is safe.
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    cached_normal_ = r * std::sin(a);
    has_cached_normal_ = true;
    return r * std::cos(a);
}

std::uint64_t SeededRng::uniform_int(std::uint64_t n) {
    if (n == 0) throw DomainError("uniform_int: n must be >= 1");
    // Rejection sampling on the top bits; unbiased and reproducible.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

SeededRng SeededRng::split(std::uint64_t tag) const {
    std::uint64_t mixer = stream_ ^ (tag * 0x9E3779B97F4A7C15ULL + 0x165667B19E3779F9ULL);
    std::uint64_t derived = splitmix64(mixer);
    return SeededRng(seed_, derived);
}

// ---- activations --------------------------------------------------------------------

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
    }
    return "?";
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::Relu;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tanh") return Activation::Tanh;
    throw DomainError("unknown activation: " + name);
}

double apply_activation(Activation kind, double z) {
    switch (kind) {
        case Activation::Identity: return z;
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::Tanh: return std::tanh(z);
    }
    return z;
}

double activation_grad(Activation kind, double z, double a) {
    switch (kind) {
        case Activation::Identity: return 1.0;
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: return a * (1.0 - a);
        case Activation::Tanh: return 1.0 - a * a;
    }
    return 1.0;
}

Vector activate(const Vector& v, Activation kind) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = apply_activation(kind, v[i]);
    return out;
}

Vector activate_grad(const Vector& z, const Vector& a, Activation kind) {
    if (z.size() != a.size()) throw ShapeError("activate_grad: length mismatch");
    Vector out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = activation_grad(kind, z[i], a[i]);
    return out;
}

// ---- linear algebra -----------------------------------------------------------------

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = ai[k];
            const double* bk = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
    if (a.cols != x.size()) throw ShapeError("matvec: dimension mismatch");
    Vector y(a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) acc += ai[j] * x[j];
        y[i] = acc;
    }
    return y;
}

Vector matvec_transposed(const Matrix& a, const Vector& x) {
    if (a.rows != x.size()) throw ShapeError("matvec_transposed: dimension mismatch");
    Vector y(a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        const double xi = x[i];
        for (std::size_t j = 0; j < a.cols; ++j) y[j] += ai[j] * xi;
    }
    return y;
}

void add_outer(Matrix& acc, const Vector& d, const Vector& x) {
    if (acc.rows != d.size() || acc.cols != x.size()) throw ShapeError("add_outer: shape mismatch");
    for (std::size_t i = 0; i < d.size(); ++i) {
        double* row = acc.row(i);
        const double di = d[i];
        for (std::size_t j = 0; j < x.size(); ++j) row[j] += di * x[j];
    }
}

Vector hadamard(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ShapeError("hadamard: length mismatch");
    Vector c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * b[i];
    return c;
}

Vector add(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ShapeError("add: length mismatch");
    Vector c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

Vector sub(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ShapeError("sub: length mismatch");
    Vector c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
    return c;
}

Vector scale(const Vector& a, double c) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * c;
    return out;
}

Matrix scale(const Matrix& a, double c) {
    Matrix out = a;
    for (double& v : out.data) v *= c;
    return out;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

// ---- spectral radius ----------------------------------------------------------------

namespace {

// Least-squares fit of w2 ~ a*w1 + b*v, then the dominant root magnitude of
// x^2 = a x + b. A negative discriminant means a conjugate pair; its magnitude
// is sqrt(-b).
double krylov_pair_estimate(const Vector& v, const Vector& w1, const Vector& w2, bool& ok) {
    const double g11 = dot(w1, w1);
    const double g12 = dot(w1, v);
    const double g22 = dot(v, v);
    const double r1 = dot(w2, w1);
    const double r2 = dot(w2, v);
    const double det = g11 * g22 - g12 * g12;
    const double scale = std::max(g11 * g22, 1e-300);
    if (det <= 1e-12 * scale) {
        ok = false;
        return 0.0;
    }
    const double a = (r1 * g22 - r2 * g12) / det;
    const double b = (g11 * r2 - g12 * r1) / det;
    const double disc = a * a + 4.0 * b;
    ok = true;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        return std::max(std::abs((a + s) / 2.0), std::abs((a - s) / 2.0));
    }
    return std::sqrt(-b);
}

}  // namespace

SpectralEstimate spectral_radius(const Matrix& w, int max_iters, double tol) {
    if (w.rows != w.cols) throw ShapeError("spectral_radius: matrix must be square");
    if (max_iters < 1) throw DomainError("spectral_radius: max_iters must be >= 1");
    const std::size_t n = w.rows;
    if (n == 0) return {0.0, true, 0};

    // Deterministic pseudo-random start so no eigenvector is exactly missed.
    SeededRng rng(0x5EED5EEDULL, 0xA11CE);
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = rng.normal();
    double nv = norm2(v);
    for (std::size_t i = 0; i < n; ++i) v[i] /= nv;

    double est = 0.0;
    double prev = -1.0;
    for (int it = 1; it <= max_iters; ++it) {
        Vector w1 = matvec(w, v);
        const double n1 = norm2(w1);
        if (n1 == 0.0) return {0.0, true, it};
        Vector w2 = matvec(w, w1);

        bool pair_ok = false;
        double cand = krylov_pair_estimate(v, w1, w2, pair_ok);
        if (!pair_ok) {
            // w1 is (numerically) colinear with v: plain Rayleigh magnitude.
            cand = std::abs(dot(v, w1) / dot(v, v));
        }
        est = cand;
        if (prev >= 0.0 && std::abs(est - prev) <= tol * std::max(1.0, std::abs(est)))
            return {est, true, it};
        prev = est;

        const double n2 = norm2(w2);
        if (n2 == 0.0) return {0.0, true, it};
        for (std::size_t i = 0; i < n; ++i) v[i] = w2[i] / n2;
    }
    return {est, false, max_iters};
}

Matrix scale_to_spectral_radius(const Matrix& w, double target) {
    if (w.rows != w.cols) throw ShapeError("scale_to_spectral_radius: matrix must be square");
    if (target <= 0.0) throw DomainError("scale_to_spectral_radius: target must be > 0");
    const SpectralEstimate est = spectral_radius(w);
    double mag = 0.0;
    for (double x : w.data) mag = std::max(mag, std::abs(x));
    if (est.value <= 1e-12 * std::max(1.0, mag))
        throw DegenerateInputError("scale_to_spectral_radius: zero-spectrum matrix");
    return scale(w, target / est.value);
}

// ---- low-pass filter ----------------------------------------------------------------

std::vector<Vector> lowpass_signal(const std::vector<Vector>& x, const Vector& alpha,
                                   const Vector& y0) {
    for (double a : alpha.data)
        if (!(a >= 0.0 && a <= 1.0)) throw DomainError("lowpass_signal: alpha outside [0,1]");
    std::vector<Vector> y;
    y.reserve(x.size());
    Vector state = y0;
    for (const Vector& xt : x) {
        if (xt.size() != alpha.size() || state.size() != alpha.size())
            throw ShapeError("lowpass_signal: dimension mismatch");
        Vector next(alpha.size());
        for (std::size_t i = 0; i < alpha.size(); ++i)
            next[i] = alpha[i] * state[i] + (1.0 - alpha[i]) * xt[i];
        y.push_back(next);
        state = y.back();
    }
    return y;
}

std::vector<double> lowpass_signal(const std::vector<double>& x, double alpha, double y0) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("lowpass_signal: alpha outside [0,1]");
    std::vector<double> y;
    y.reserve(x.size());
    double state = y0;
    for (double xt : x) {
        state = alpha * state + (1.0 - alpha) * xt;
        y.push_back(state);
    }
    return y;
}

// ---- gradient clipping --------------------------------------------------------------

ClipResult clip_global_norm(std::span<std::span<double>> tensors, double max_norm) {
    if (max_norm <= 0.0) throw DomainError("clip_global_norm: max_norm must be > 0");
    double sum_sq = 0.0;
    for (const auto& t : tensors)
        for (double v : t) sum_sq += v * v;
    const double norm = std::sqrt(sum_sq);
    ClipResult result{1.0, norm};
    if (norm > max_norm) {
        result.applied_scale = max_norm / norm;
        for (auto& t : tensors)
            for (double& v : t) v *= result.applied_scale;
    }
    return result;
}

// ---- dense solve --------------------------------------------------------------------

Matrix solve_linear(Matrix a, Matrix b) {
    if (a.rows != a.cols) throw ShapeError("solve_linear: matrix must be square");
    if (a.rows != b.rows) throw ShapeError("solve_linear: rhs row count mismatch");
    const std::size_t n = a.rows;
    // LU with partial pivoting, applied in place to the rhs block.
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double cand = std::abs(a(i, k));
            if (cand > best) {
                best = cand;
                piv = i;
            }
        }
        if (best < 1e-300) throw DegenerateInputError("solve_linear: singular matrix");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < b.cols; ++j) std::swap(b(k, j), b(piv, j));
        }
        const double inv_pivot = 1.0 / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) * inv_pivot;
            if (f == 0.0) continue;
            a(i, k) = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < b.cols; ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (std::size_t kk = n; kk-- > 0;) {
        const double inv_pivot = 1.0 / a(kk, kk);
        for (std::size_t j = 0; j < b.cols; ++j) {
            double acc = b(kk, j);
            for (std::size_t m = kk + 1; m < n; ++m) acc -= a(kk, m) * b(m, j);
            b(kk, j) = acc * inv_pivot;
        }
    }
    return b;
}

Vector solve_linear(Matrix a, Vector b) {
    Matrix rhs(b.size(), 1);
    for (std::size_t i = 0; i < b.size(); ++i) rhs(i, 0) = b[i];
    Matrix x = solve_linear(std::move(a), std::move(rhs));
    Vector out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = x(i, 0);
    return out;
}

bool all_finite(const Vector& v) {
    for (double x : v.data)
        if (!std::isfinite(x)) return false;
    return true;
}

bool all_finite(const Matrix& m) {
    for (double x : m.data)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace lprnn
