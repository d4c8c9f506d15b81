#include <doctest.h>

#include <cmath>
#include <vector>

#include "lprnn/numerics.hpp"

#if __has_include(<Eigen/Eigenvalues>)
#include <Eigen/Eigenvalues>
#define HAVE_EIGEN_ORACLE 1
#endif

using namespace lprnn;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, SeededRng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = rng.normal();
    return m;
}

#ifdef HAVE_EIGEN_ORACLE
/// Independent spectral radius via Eigen's dense eigensolver.
double eigen_spectral_radius(const Matrix& m) {
    Eigen::MatrixXd e(m.rows, m.cols);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) e(static_cast<long>(i), static_cast<long>(j)) = m(i, j);
    const auto values = Eigen::EigenSolver<Eigen::MatrixXd>(e, false).eigenvalues();
    double rho = 0.0;
    for (long i = 0; i < values.size(); ++i) rho = std::max(rho, std::abs(values[i]));
    return rho;
}
#endif

}  // namespace

TEST_CASE("matrix and vector basics") {
    Matrix id = Matrix::identity(3);
    CHECK(id(0, 0) == 1.0);
    CHECK(id(0, 1) == 0.0);

    Matrix m(2, 3);
    m(0, 0) = 1; m(0, 1) = 2; m(0, 2) = 3;
    m(1, 0) = 4; m(1, 1) = 5; m(1, 2) = 6;
    Vector r(m.cols);
    for (std::size_t j = 0; j < m.cols; ++j) r[j] = m.row(1)[j];
    CHECK(r == Vector{4, 5, 6});

    Vector v{1, 2, 3};
    CHECK(v.size() == 3);
    CHECK(v[2] == 3.0);
}

TEST_CASE("matmul matches hand arithmetic") {
    // [[1,2,3],[4,5,6]] * [[7,8],[9,10],[11,12]] = [[58,64],[139,154]]
    Matrix a(2, 3);
    a.data = {1, 2, 3, 4, 5, 6};
    Matrix b(3, 2);
    b.data = {7, 8, 9, 10, 11, 12};
    Matrix c = matmul(a, b);
    CHECK(c.rows == 2);
    CHECK(c.cols == 2);
    CHECK(c(0, 0) == 58.0);
    CHECK(c(0, 1) == 64.0);
    CHECK(c(1, 0) == 139.0);
    CHECK(c(1, 1) == 154.0);

    CHECK_THROWS_AS(matmul(a, a), ShapeError);
}

TEST_CASE("matmul is associative within float tolerance") {
    SeededRng rng(11);
    Matrix a = random_matrix(7, 5, rng);
    Matrix b = random_matrix(5, 4, rng);
    Matrix c = random_matrix(4, 6, rng);
    Matrix left = matmul(matmul(a, b), c);
    Matrix right = matmul(a, matmul(b, c));
    for (std::size_t i = 0; i < left.data.size(); ++i)
        CHECK(left.data[i] == doctest::Approx(right.data[i]).epsilon(1e-10));
}

TEST_CASE("matvec and transposed matvec match manual sums") {
    Matrix a(2, 3);
    a.data = {1, 2, 3, 4, 5, 6};
    Vector x{1, 0, -1};
    Vector y = matvec(a, x);
    CHECK(y == Vector{1 * 1 + 2 * 0 + 3 * -1, 4 * 1 + 5 * 0 + 6 * -1});

    Vector d{2, -1};
    Vector back = matvec_transposed(a, d);  // a^T d
    CHECK(back == Vector{1 * 2 + 4 * -1, 2 * 2 + 5 * -1, 3 * 2 + 6 * -1});

    CHECK_THROWS_AS(matvec(a, Vector{1, 2}), ShapeError);
}

TEST_CASE("add_outer accumulates d x^T") {
    Matrix acc(2, 2, 1.0);
    add_outer(acc, Vector{1, 2}, Vector{3, 4});
    CHECK(acc(0, 0) == 1 + 1 * 3);
    CHECK(acc(0, 1) == 1 + 1 * 4);
    CHECK(acc(1, 0) == 1 + 2 * 3);
    CHECK(acc(1, 1) == 1 + 2 * 4);
}

TEST_CASE("elementwise helpers") {
    Vector a{1, 2, 3};
    Vector b{4, 5, 6};
    CHECK(hadamard(a, b) == Vector{4, 10, 18});
    CHECK(add(a, b) == Vector{5, 7, 9});
    CHECK(sub(b, a) == Vector{3, 3, 3});
    CHECK(scale(a, 2.0) == Vector{2, 4, 6});
    CHECK(dot(a, b) == 32.0);
    CHECK(norm2(Vector{3, 4}) == 5.0);
    CHECK_THROWS_AS(hadamard(a, Vector{1}), ShapeError);
}

TEST_CASE("seeded rng is deterministic and stream-separated") {
    SeededRng a(123, 7);
    SeededRng b(123, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    SeededRng c(123, 8);
    bool differs = false;
    SeededRng a2(123, 7);
    for (int i = 0; i < 10; ++i) differs |= (a2.next_u64() != c.next_u64());
    CHECK(differs);

    SeededRng root(42);
    SeededRng s1 = root.split(1);
    SeededRng s2 = root.split(2);
    SeededRng s1_again = root.split(1);
    CHECK(s1.next_u64() == s1_again.next_u64());
    bool split_differs = false;
    SeededRng s1b = root.split(1);
    for (int i = 0; i < 10; ++i) split_differs |= (s1b.next_u64() != s2.next_u64());
    CHECK(split_differs);
}

TEST_CASE("rng distributions look right") {
    SeededRng rng(99);
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sq += u * u;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
    CHECK(var == doctest::Approx(1.0 / 12.0).epsilon(0.05));

    double nsum = 0.0, nsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double g = rng.normal();
        nsum += g;
        nsq += g * g;
    }
    CHECK(std::abs(nsum / n) < 0.02);
    CHECK(nsq / n == doctest::Approx(1.0).epsilon(0.05));

    std::vector<int> counts(5, 0);
    for (int i = 0; i < 50000; ++i) {
        std::size_t k = rng.uniform_int(5);
        REQUIRE(k < 5);
        ++counts[k];
    }
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
    CHECK_THROWS_AS(rng.uniform_int(0), DomainError);

    double lo = 1e9, hi = -1e9;
    for (int i = 0; i < 1000; ++i) {
        double u = rng.uniform(-2.0, 3.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo >= -2.0);
    CHECK(hi < 3.0);
}

TEST_CASE("activations and their derivatives") {
    CHECK(apply_activation(Activation::Identity, -1.3) == -1.3);
    CHECK(apply_activation(Activation::Relu, -1.3) == 0.0);
    CHECK(apply_activation(Activation::Relu, 2.5) == 2.5);
    CHECK(apply_activation(Activation::Tanh, 0.5) == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
    CHECK(apply_activation(Activation::Sigmoid, 0.0) == 0.5);

    // Finite-difference oracle at smooth points.
    for (Activation kind :
         {Activation::Identity, Activation::Relu, Activation::Sigmoid, Activation::Tanh}) {
        for (double z : {-1.7, -0.3, 0.4, 1.9}) {
            const double eps = 1e-6;
            const double fd =
                (apply_activation(kind, z + eps) - apply_activation(kind, z - eps)) / (2 * eps);
            const double a = apply_activation(kind, z);
            CHECK(activation_grad(kind, z, a) == doctest::Approx(fd).epsilon(1e-7));
        }
    }

    CHECK(activation_name(Activation::Tanh) == std::string("tanh"));
    CHECK(activation_from_name("relu") == Activation::Relu);
    CHECK_THROWS_AS(activation_from_name("sin"), DomainError);
}

TEST_CASE("spectral radius agrees with a diagonal oracle") {
    Matrix d(3, 3);
    d(0, 0) = 0.2;
    d(1, 1) = -0.9;
    d(2, 2) = 0.5;
    SpectralEstimate est = spectral_radius(d);
    CHECK(est.value == doctest::Approx(0.9).epsilon(1e-10));

    Matrix zero(4, 4);
    CHECK(spectral_radius(zero).value == 0.0);
}

TEST_CASE("spectral radius handles a complex conjugate pair") {
    // 0.9 * rotation(0.7): eigenvalues 0.9 e^{+-0.7i}, modulus 0.9.
    const double r = 0.9, th = 0.7;
    Matrix w(2, 2);
    w(0, 0) = r * std::cos(th);
    w(0, 1) = -r * std::sin(th);
    w(1, 0) = r * std::sin(th);
    w(1, 1) = r * std::cos(th);
    SpectralEstimate est = spectral_radius(w);
    CHECK(est.value == doctest::Approx(0.9).epsilon(1e-8));
}

#ifdef HAVE_EIGEN_ORACLE
TEST_CASE("spectral radius matches the Eigen oracle on random matrices") {
    for (std::uint64_t seed : {1, 2, 3}) {
        SeededRng rng(seed);
        Matrix w = random_matrix(50, 50, rng);
        const double oracle = eigen_spectral_radius(w);
        CHECK(spectral_radius(w).value == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("scale_to_spectral_radius lands on target per the Eigen oracle") {
    SeededRng rng(5);
    Matrix w = random_matrix(50, 50, rng);
    Matrix scaled = scale_to_spectral_radius(w, 0.95);
    CHECK(eigen_spectral_radius(scaled) == doctest::Approx(0.95).epsilon(1e-6));
}
#endif

TEST_CASE("spectral radius scales linearly with the matrix") {
    SeededRng rng(17);
    Matrix w = random_matrix(20, 20, rng);
    const double rho = spectral_radius(w).value;
    for (double c : {-2.0, 0.5, 3.0}) {
        Matrix cw = scale(w, c);
        CHECK(spectral_radius(cw).value == doctest::Approx(std::abs(c) * rho).epsilon(1e-8));
    }
}

TEST_CASE("lowpass closed form: unit input, alpha one half") {
    std::vector<double> x(10, 1.0);
    std::vector<double> y = lowpass_signal(x, 0.5, 0.0);
    REQUIRE(y.size() == 10);
    for (std::size_t t = 0; t < y.size(); ++t)
        CHECK(y[t] == 1.0 - std::pow(0.5, static_cast<double>(t + 1)));  // dyadic, exact
}

TEST_CASE("lowpass DC gain is one") {
    std::vector<double> x(500, 0.7);
    std::vector<double> y = lowpass_signal(x, 0.98, 0.0);
    CHECK(y.back() == doctest::Approx(0.7).epsilon(1e-3));
}

TEST_CASE("vector lowpass matches the scalar overload per component") {
    SeededRng rng(3);
    std::vector<Vector> x(40, Vector(2));
    std::vector<double> x0(40), x1(40);
    for (std::size_t t = 0; t < 40; ++t) {
        x[t][0] = x0[t] = rng.uniform(-1, 1);
        x[t][1] = x1[t] = rng.uniform(-1, 1);
    }
    Vector alpha{0.3, 0.85};
    std::vector<Vector> y = lowpass_signal(x, alpha, Vector(2));
    std::vector<double> y0 = lowpass_signal(x0, 0.3, 0.0);
    std::vector<double> y1 = lowpass_signal(x1, 0.85, 0.0);
    for (std::size_t t = 0; t < 40; ++t) {
        CHECK(y[t][0] == y0[t]);
        CHECK(y[t][1] == y1[t]);
    }
}

TEST_CASE("global norm clipping") {
    std::vector<double> g1{3.0};
    std::vector<double> g2{4.0};
    std::vector<std::span<double>> tensors{std::span<double>(g1), std::span<double>(g2)};
    ClipResult res = clip_global_norm(tensors, 1.0);
    CHECK(res.norm == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(res.applied_scale == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::sqrt(g1[0] * g1[0] + g2[0] * g2[0]) <= 1.0 + 1e-12);

    std::vector<double> small{0.1, 0.1};
    std::vector<std::span<double>> one{std::span<double>(small)};
    ClipResult res2 = clip_global_norm(one, 1.0);
    CHECK(res2.applied_scale == 1.0);
    CHECK(small[0] == 0.1);
}

TEST_CASE("solve_linear on a hand system and a random round trip") {
    Matrix a(2, 2);
    a.data = {2, 1, 1, 3};
    Vector x = solve_linear(a, Vector{5, 10});  // x = [1, 3]
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-12));

    SeededRng rng(8);
    Matrix m = random_matrix(6, 6, rng);
    Vector want(6);
    for (double& v : want.data) v = rng.uniform(-2, 2);
    Vector b = matvec(m, want);
    Vector got = solve_linear(m, b);
    for (std::size_t i = 0; i < 6; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));

    Matrix singular(2, 2);
    singular.data = {1, 2, 2, 4};
    CHECK_THROWS_AS(solve_linear(singular, Vector{1, 1}), DegenerateInputError);
}

TEST_CASE("solve_linear matrix right-hand side inverts") {
    SeededRng rng(21);
    Matrix m = random_matrix(5, 5, rng);
    Matrix inv = solve_linear(m, Matrix::identity(5));
    Matrix prod = matmul(m, inv);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            CHECK(prod(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
}

TEST_CASE("all_finite flags bad values") {
    Vector v{1, 2, 3};
    CHECK(all_finite(v));
    v[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(all_finite(v));
    Matrix m(2, 2, 1.0);
    CHECK(all_finite(m));
    m.data[3] = std::numeric_limits<double>::infinity();
    CHECK_FALSE(all_finite(m));
}
