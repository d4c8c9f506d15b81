#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "lprnn/tasks.hpp"

using namespace lprnn;

TEST_CASE("addition samples have the documented structure") {
    SeededRng root(100);
    for (std::size_t i = 0; i < 200; ++i) {
        SeededRng rng = root.split(i);
        const AdditionSample s = gen_addition(40, 2, rng);
        REQUIRE(s.x.size() == 40);
        double sum = 0.0;
        std::size_t first = 40, second = 40, markers = 0;
        for (std::size_t t = 0; t < 40; ++t) {
            REQUIRE(s.x[t].size() == 2);
            CHECK(s.x[t][0] > 0.0);
            CHECK(s.x[t][0] < 1.0);
            const double m = s.x[t][1];
            REQUIRE((m == 0.0 || m == 1.0));
            if (m == 1.0) {
                ++markers;
                if (first == 40)
                    first = t;
                else
                    second = t;
                sum += s.x[t][0];
            }
        }
        CHECK(markers == 2);
        CHECK(first < 20);    // first marker in the first half
        CHECK(second >= 20);  // second marker in the second half
        CHECK(sum == s.target);
    }
}

TEST_CASE("addition with many markers places them without replacement") {
    SeededRng rng(7);
    const AdditionSample s = gen_addition(30, 7, rng);
    std::set<std::size_t> positions;
    double sum = 0.0;
    for (std::size_t t = 0; t < 30; ++t)
        if (s.x[t][1] == 1.0) {
            positions.insert(t);
            sum += s.x[t][0];
        }
    CHECK(positions.size() == 7);
    CHECK(sum == doctest::Approx(s.target).epsilon(1e-15));
}

TEST_CASE("addition argument validation") {
    SeededRng rng(1);
    CHECK_THROWS_AS(gen_addition(10, 1, rng), DomainError);
    CHECK_THROWS_AS(gen_addition(3, 2, rng), DomainError);  // length < 2 * markers
}

TEST_CASE("constant-one predictor lands near the analytic mse") {
    // Var(U1 + U2) = 2/12; the constant 1 equals the mean of the target.
    CHECK(kAdditionConstOneMse == 1.0 / 6.0);
    SeededRng root(2024);
    double acc = 0.0;
    const std::size_t n = 20000;
    for (std::size_t i = 0; i < n; ++i) {
        SeededRng rng = root.split(i);
        const AdditionSample s = gen_addition(50, 2, rng);
        acc += (1.0 - s.target) * (1.0 - s.target);
    }
    const double mse = acc / static_cast<double>(n);
    CHECK(mse > 0.160);
    CHECK(mse < 0.174);
}

TEST_CASE("copy samples are a delayed identity") {
    SeededRng root(5);
    for (std::size_t i = 0; i < 100; ++i) {
        SeededRng rng = root.split(i);
        const std::size_t k = 8, t_blanks = 12;
        const CopySample s = gen_copy(5, t_blanks, k, rng);
        REQUIRE(s.s >= 1);
        REQUIRE(s.s <= 5);
        const std::size_t len = s.s + t_blanks + 1;
        REQUIRE(s.x.size() == len);
        REQUIRE(s.target.size() == len);

        for (std::size_t t = 0; t < len; ++t) {
            const std::size_t cls = one_hot_decode(s.x[t]);
            if (t < s.s)
                CHECK(cls < k);  // data prefix
            else if (t < s.s + t_blanks)
                CHECK(cls == k);  // blanks
            else
                CHECK(cls == k + 1);  // trigger
        }
        for (std::size_t t = 0; t < len; ++t) {
            if (t <= t_blanks) {
                CHECK(s.target[t] == k);  // blank until the delay elapses
            } else {
                // Delay line: the input from t - (t_blanks + 1) steps earlier.
                CHECK(s.target[t] == one_hot_decode(s.x[t - (t_blanks + 1)]));
            }
        }
    }
}

TEST_CASE("copy validation and blank floor") {
    SeededRng rng(3);
    CHECK_THROWS_AS(gen_copy(0, 5, 8, rng), DomainError);
    CHECK_THROWS_AS(gen_copy(5, 0, 8, rng), DomainError);
    CHECK_THROWS_AS(gen_copy(5, 5, 1, rng), DomainError);

    // s_max 1, t 1: length 3, two blank targets -> 2/3.
    CHECK(copy_blank_accuracy_floor(1, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    // s_max 2, t 2: mean of 3/4 and 3/5.
    CHECK(copy_blank_accuracy_floor(2, 2) == doctest::Approx(0.675).epsilon(1e-15));
    // Longer delays push the floor toward 1.
    CHECK(copy_blank_accuracy_floor(5, 50) > copy_blank_accuracy_floor(5, 10));
    // Fixed s 8, t 92: (92 + 1) / 101.
    CHECK(copy_blank_accuracy_floor(8, 92) >= 93.0 / 101.0);
}

TEST_CASE("one hot encodes and decodes") {
    Vector v = one_hot(2, 4);
    CHECK(v == Vector{0, 0, 1, 0});
    CHECK(one_hot_decode(v) == 2);
    CHECK_THROWS_AS(one_hot(4, 4), DomainError);
}

TEST_CASE("esn pattern signal: bursts alternate and stay in range") {
    SeededRng rng(9);
    const EsnPatternSignal sig = gen_esn_pattern(20000, rng);
    REQUIRE(sig.x.size() == 20000);
    REQUIRE(sig.label_trace.size() == 20000);

    std::size_t pos = 0, neg = 0;
    for (std::size_t t = 0; t < sig.x.size(); ++t) {
        CHECK(std::abs(sig.x[t]) <= 1.0 + 1e-12);
        const double l = sig.label_trace[t];
        REQUIRE((l == 1.0 || l == -1.0 || l == 0.0));
        if (l == 1.0) ++pos;
        if (l == -1.0) ++neg;
    }
    CHECK(pos > 0);
    CHECK(neg > 0);
    // Strict alternation keeps the two classes balanced to within one burst.
    CHECK(std::abs(static_cast<double>(pos) - static_cast<double>(neg)) <
          0.1 * static_cast<double>(pos + neg));

    // Plateau signs must strictly alternate.
    double prev_plateau = 0.0;
    std::size_t plateaus = 0;
    for (std::size_t t = 1; t < sig.label_trace.size(); ++t) {
        const double l = sig.label_trace[t];
        if (l != 0.0 && sig.label_trace[t - 1] == 0.0) {  // plateau onset
            if (prev_plateau != 0.0) CHECK(l == -prev_plateau);
            prev_plateau = l;
            ++plateaus;
        }
    }
    CHECK(plateaus >= 20000 / 100 - 1);  // at least one burst per 100 steps
}

TEST_CASE("esn pattern is deterministic and validates its length") {
    SeededRng a(4), b(4);
    const EsnPatternSignal s1 = gen_esn_pattern(500, a);
    const EsnPatternSignal s2 = gen_esn_pattern(500, b);
    CHECK(s1.x == s2.x);
    CHECK(s1.label_trace == s2.label_trace);

    SeededRng rng(4);
    CHECK_THROWS_AS(gen_esn_pattern(100, rng), DomainError);
}
