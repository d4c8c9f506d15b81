#pragma once

#include <cstddef>
#include <vector>

#include "lprnn/cells.hpp"
#include "lprnn/esn.hpp"
#include "lprnn/numerics.hpp"

namespace lprnn {

/// First-order delta-sigma spike coder. The integrator accumulates the drive
/// in signal*time units; every crossing of theta drains one quantum and emits
/// a spike, so a sustained drive s spikes at rate s/theta per unit time. The
/// decoder low-passes the spike impulses (area theta each) with the membrane
/// time constant, recovering the drive with unity DC gain and ripple of order
/// theta. Representable drive magnitude is theta * oversampling (one spike per
/// substep); callers keep signals inside that budget.
struct DsNeuronConfig {
    double theta = 0.01;       // spike quantum, signal * RNN-steps
    double tau_mem = 10.0;     // decoder time constant, RNN steps
    std::size_t oversampling = 64;  // substeps per RNN step
    bool bipolar = true;

    void validate() const;
    double dt_sub() const { return 1.0 / static_cast<double>(oversampling); }
    /// Per-substep retention of the decoder filter.
    double beta() const;
    /// Per-RNN-step retention (the alpha this neuron realizes).
    double alpha_equiv() const;
};

struct DsNeuronState {
    double u = 0.0;     // integrator
    double r = 0.0;     // decoded output
    double last = 0.0;  // instantaneous output of the most recent substep
};

struct SpikeEvent {
    std::size_t substep = 0;
    int sign = 0;  // +1 or -1
};

struct SpikeTrain {
    std::vector<SpikeEvent> events;
};

/// One substep of the coder; returns the emitted spike sign (0 for none).
int ds_encode_step(DsNeuronState& state, double drive, const DsNeuronConfig& config);

/// A spiking copy of a low-pass RNN: same kernels, one coder per unit with
/// tau_mem solved from that unit's alpha.
struct SnnNetwork {
    Matrix w_in;
    Matrix w_rec;
    Vector b;
    Activation activation = Activation::Tanh;
    std::vector<DsNeuronConfig> neurons;
    std::vector<DsNeuronState> states;

    std::size_t hidden() const { return w_rec.rows; }
};

/// Copies weights and maps each unit's alpha to tau_mem = -1/ln(alpha).
/// Units with alpha of exactly 0 or 1 have no finite time constant.
SnnNetwork map_to_snn(const LpRnnParams& source, const DsNeuronConfig& config_template);
SnnNetwork map_to_snn(const EsnParams& source, const DsNeuronConfig& config_template);

struct SnnRun {
    std::vector<Vector> decoded;      // RNN-rate decoded unit outputs
    std::vector<SpikeTrain> spikes;   // per unit, substep-indexed
    std::size_t substeps = 0;
    double max_abs_u = 0.0;           // worst integrator excursion seen
    double integrator_bound = 0.0;    // theta + max |drive| * dt_sub
    bool integrator_bounded = true;
};

/// Simulates the spiking network on an RNN-rate input sequence. Input is held
/// (zero-order) across the substeps of each step; unit drives are re-evaluated
/// every substep from the previous substep's decoded values; the decoded state
/// is sampled at the last substep of each step.
SnnRun simulate_snn(SnnNetwork& net, const std::vector<Vector>& x_seq);

/// Sum of squared residuals over the variance of the reference.
double nmse(const std::vector<double>& reference, const std::vector<double>& test);
/// Pooled over units, with per-unit reference means.
double nmse(const std::vector<Vector>& reference, const std::vector<Vector>& test);

struct SpikeCountReport {
    std::vector<std::size_t> per_unit;
    std::vector<std::size_t> per_unit_positive;
    std::vector<std::size_t> per_unit_negative;
    std::size_t total = 0;
    double spikes_per_step = 0.0;  // network total per RNN step
};

SpikeCountReport spike_count_report(const SnnRun& run, std::size_t oversampling);

struct HighbandResult {
    double nmse_raw = 0.0;
    double nmse_smoothed = 0.0;
};

/// NMSE before and after low-passing both series with alpha_smooth; a drop
/// means the residual lives at high frequency.
HighbandResult highband_residual_check(const std::vector<double>& reference,
                                       const std::vector<double>& test, double alpha_smooth);

}  // namespace lprnn
