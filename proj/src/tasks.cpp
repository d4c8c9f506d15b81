#include "lprnn/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lprnn {

namespace {

double uniform_open01(SeededRng& rng) {
    double v = rng.uniform01();
    while (v == 0.0) v = rng.uniform01();
    return v;
}

}  // namespace

AdditionSample gen_addition(std::size_t length, std::size_t marker_count, SeededRng& rng) {
    if (marker_count < 2) throw DomainError("gen_addition: need at least 2 markers");
    if (length < 2 * marker_count) throw DomainError("gen_addition: length too short for markers");

    std::vector<std::size_t> positions;
    positions.reserve(marker_count);
    if (marker_count == 2) {
        const std::size_t half = length / 2;
        positions.push_back(rng.uniform_int(half));
        positions.push_back(half + rng.uniform_int(length - half));
    } else {
        // Partial Fisher-Yates over the index range, then sort.
        std::vector<std::size_t> idx(length);
        for (std::size_t i = 0; i < length; ++i) idx[i] = i;
        for (std::size_t i = 0; i < marker_count; ++i) {
            const std::size_t j = i + rng.uniform_int(length - i);
            std::swap(idx[i], idx[j]);
        }
        positions.assign(idx.begin(), idx.begin() + marker_count);
        std::sort(positions.begin(), positions.end());
    }

    AdditionSample sample;
    sample.length = length;
    sample.marker_count = marker_count;
    sample.x.reserve(length);
    for (std::size_t t = 0; t < length; ++t) sample.x.push_back({uniform_open01(rng), 0.0});
    for (const std::size_t p : positions) {
        sample.x[p][1] = 1.0;
        sample.target += sample.x[p][0];
    }
    return sample;
}

CopySample gen_copy(std::size_t s_max, std::size_t t_blanks, std::size_t k, SeededRng& rng) {
    if (k < 2) throw DomainError("gen_copy: alphabet needs at least 2 data symbols");
    if (s_max < 1) throw DomainError("gen_copy: s_max must be >= 1");
    if (t_blanks < 1) throw DomainError("gen_copy: t_blanks must be >= 1");

    CopySample sample;
    sample.k = k;
    sample.t_blanks = t_blanks;
    sample.s = 1 + rng.uniform_int(s_max);

    const std::size_t blank = k;
    const std::size_t trigger = k + 1;
    const std::size_t length = sample.s + t_blanks + 1;

    std::vector<std::size_t> input_classes;
    input_classes.reserve(length);
    for (std::size_t i = 0; i < sample.s; ++i) input_classes.push_back(rng.uniform_int(k));
    for (std::size_t i = 0; i < t_blanks; ++i) input_classes.push_back(blank);
    input_classes.push_back(trigger);

    sample.x.reserve(length);
    for (const std::size_t cls : input_classes) sample.x.push_back(one_hot(cls, k + 2));

    sample.target.assign(length, blank);
    for (std::size_t i = 0; i < sample.s; ++i) sample.target[t_blanks + 1 + i] = input_classes[i];
    return sample;
}

double copy_blank_accuracy_floor(std::size_t s_max, std::size_t t_blanks) {
    double acc = 0.0;
    for (std::size_t s = 1; s <= s_max; ++s)
        acc += static_cast<double>(t_blanks + 1) / static_cast<double>(s + t_blanks + 1);
    return acc / static_cast<double>(s_max);
}

Vector one_hot(std::size_t cls, std::size_t n_classes) {
    if (cls >= n_classes) throw DomainError("one_hot: class out of range");
    Vector v(n_classes, 0.0);
    v[cls] = 1.0;
    return v;
}

std::size_t one_hot_decode(const Vector& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

EsnPatternSignal gen_esn_pattern(std::size_t n_steps, SeededRng& rng) {
    if (n_steps < 200) throw DomainError("gen_esn_pattern: need at least 200 steps");

    constexpr double kFreqA = 0.02;  // cycles per step
    constexpr double kFreqB = 0.05;
    constexpr std::size_t kRamp = 10;

    EsnPatternSignal signal;
    signal.x.reserve(n_steps);
    signal.label_trace.reserve(n_steps);

    bool is_a = true;
    while (signal.x.size() < n_steps) {
        const std::size_t burst_len = 50 + rng.uniform_int(51);  // 50..100
        const double freq = is_a ? kFreqA : kFreqB;
        const double label = is_a ? 1.0 : -1.0;
        for (std::size_t t = 0; t < burst_len && signal.x.size() < n_steps; ++t) {
            double envelope = 1.0;
            bool on_ramp = false;
            if (t < kRamp) {
                envelope = 0.5 * (1.0 - std::cos(std::numbers::pi * t / kRamp));
                on_ramp = true;
            } else if (t >= burst_len - kRamp) {
                const std::size_t left = burst_len - 1 - t;
                envelope = 0.5 * (1.0 - std::cos(std::numbers::pi * left / kRamp));
                on_ramp = true;
            }
            signal.x.push_back(envelope * std::sin(2.0 * std::numbers::pi * freq * t));
            signal.label_trace.push_back(on_ramp ? 0.0 : label);
        }
        is_a = !is_a;
    }
    return signal;
}

}  // namespace lprnn
