#pragma once

#include <cstddef>
#include <vector>

#include "lprnn/numerics.hpp"

namespace lprnn {

/// Two-stream adding problem. Stream 0 carries uniform(0,1) values at every
/// step, stream 1 is a 0/1 marker lane; the target is the sum of the stream-0
/// values at the marked steps.
struct AdditionSample {
    std::vector<Vector> x;  // per step: {value, marker}
    double target = 0.0;
    std::size_t length = 0;
    std::size_t marker_count = 0;
};

/// With two markers the first lands uniformly in the first half and the second
/// in the second half, so the dependency always spans at least half the
/// sequence. More markers are placed uniformly without replacement.
AdditionSample gen_addition(std::size_t length, std::size_t marker_count, SeededRng& rng);

/// Mean squared error of the constant-1 predictor on two-marker samples
/// (variance of the sum of two uniform(0,1) draws).
inline constexpr double kAdditionConstOneMse = 1.0 / 6.0;

/// Delayed-copy task over an alphabet of k data symbols plus blank (class k)
/// and trigger (class k+1). The input is s data symbols, t_blanks blanks, and
/// one trigger; the target repeats the data prefix after t_blanks + 1 steps of
/// blanks, so input and target have equal length s + t_blanks + 1.
struct CopySample {
    std::vector<Vector> x;            // one-hot over k + 2 classes
    std::vector<std::size_t> target;  // class indices, same length as x
    std::size_t s = 0;                // data symbols in this sample
    std::size_t t_blanks = 0;
    std::size_t k = 0;
};

/// s is drawn uniformly from [1, s_max]; data symbols uniformly from [0, k).
CopySample gen_copy(std::size_t s_max, std::size_t t_blanks, std::size_t k, SeededRng& rng);

/// Categorical accuracy of the predictor that always emits blank, averaged
/// over the s distribution: mean over s of (t_blanks + 1) / (s + t_blanks + 1).
double copy_blank_accuracy_floor(std::size_t s_max, std::size_t t_blanks);

Vector one_hot(std::size_t cls, std::size_t n_classes);
std::size_t one_hot_decode(const Vector& v);

/// Scalar burst signal for the reservoir demo: strictly alternating bursts of
/// 50..100 steps of two sinusoids (0.02 and 0.05 cycles/step), each with a
/// 10-step raised-cosine on/off ramp. label_trace is +1 inside an A burst's
/// plateau, -1 inside a B plateau, and 0 on the ramps.
struct EsnPatternSignal {
    std::vector<double> x;
    std::vector<double> label_trace;
};

EsnPatternSignal gen_esn_pattern(std::size_t n_steps, SeededRng& rng);

}  // namespace lprnn
