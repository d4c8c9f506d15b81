#include "lprnn/snn.hpp"

#include <cmath>

namespace lprnn {

void DsNeuronConfig::validate() const {
    if (!(theta > 0.0)) throw DomainError("ds neuron: theta must be > 0");
    if (oversampling < 1) throw DomainError("ds neuron: oversampling must be >= 1");
    if (!(tau_mem > 0.0)) throw DomainError("ds neuron: tau_mem must be > 0");
}

double DsNeuronConfig::beta() const {
    return std::exp(-1.0 / (tau_mem * static_cast<double>(oversampling)));
}

double DsNeuronConfig::alpha_equiv() const { return std::exp(-1.0 / tau_mem); }

int ds_encode_step(DsNeuronState& state, double drive, const DsNeuronConfig& config) {
    if (!std::isfinite(drive)) throw DomainError("ds_encode_step: non-finite drive");
    const double dt = config.dt_sub();
    state.u += drive * dt;

    int spike = 0;
    if (state.u >= config.theta) {
        spike = 1;
        state.u -= config.theta;
    } else if (config.bipolar && state.u <= -config.theta) {
        spike = -1;
        state.u += config.theta;
    } else if (!config.bipolar && state.u < -config.theta) {
        // One-sided coder: negative drive rails the integrator at the
        // threshold instead of winding up without bound.
        state.u = -config.theta;
    }

    const double height = config.theta / dt;  // impulse of area theta
    state.last = static_cast<double>(spike) * height;
    const double beta = config.beta();
    state.r = beta * state.r + (1.0 - beta) * state.last;
    return spike;
}

namespace {

SnnNetwork map_weights(const Matrix& w_in, const Matrix& w_rec, const Vector& b, Activation act,
                       const Vector& alpha, const DsNeuronConfig& config_template) {
    config_template.validate();
    SnnNetwork net;
    net.w_in = w_in;
    net.w_rec = w_rec;
    net.b = b;
    net.activation = act;
    net.neurons.reserve(alpha.size());
    for (const double a : alpha.data) {
        if (!(a > 0.0 && a < 1.0))
            throw DomainError("map_to_snn: alpha must lie strictly inside (0,1)");
        DsNeuronConfig cfg = config_template;
        cfg.tau_mem = -1.0 / std::log(a);
        net.neurons.push_back(cfg);
    }
    net.states.assign(alpha.size(), DsNeuronState{});
    return net;
}

}  // namespace

SnnNetwork map_to_snn(const LpRnnParams& source, const DsNeuronConfig& config_template) {
    source.validate();
    return map_weights(source.w_in, source.w_rec, source.b, source.activation,
                       source.effective_alpha(), config_template);
}

SnnNetwork map_to_snn(const EsnParams& source, const DsNeuronConfig& config_template) {
    return map_weights(source.w_in, source.w_rec, Vector(source.hidden(), 0.0),
                       source.activation, source.alpha, config_template);
}

SnnRun simulate_snn(SnnNetwork& net, const std::vector<Vector>& x_seq) {
    const std::size_t n = net.hidden();
    if (net.neurons.size() != n || net.states.size() != n)
        throw ShapeError("simulate_snn: per-unit config/state size mismatch");
    const std::size_t m = net.neurons.empty() ? 1 : net.neurons[0].oversampling;
    for (const auto& cfg : net.neurons)
        if (cfg.oversampling != m)
            throw DomainError("simulate_snn: all units must share one substep grid");

    SnnRun run;
    run.spikes.assign(n, SpikeTrain{});
    run.decoded.reserve(x_seq.size());

    Vector r_prev(n);
    for (std::size_t i = 0; i < n; ++i) r_prev[i] = net.states[i].r;

    std::size_t substep = 0;
    for (const Vector& xt : x_seq) {
        if (xt.size() != net.w_in.cols) throw ShapeError("simulate_snn: input size");
        const Vector zin = matvec(net.w_in, xt);  // input held across the step
        for (std::size_t sub = 0; sub < m; ++sub, ++substep) {
            const Vector zrec = matvec(net.w_rec, r_prev);
            for (std::size_t i = 0; i < n; ++i) {
                const double drive =
                    apply_activation(net.activation, zrec[i] + zin[i] + net.b[i]);
                if (!std::isfinite(drive))
                    throw DivergenceError("simulate_snn: non-finite drive");
                const int spike = ds_encode_step(net.states[i], drive, net.neurons[i]);
                if (spike != 0) run.spikes[i].events.push_back({substep, spike});

                const double bound =
                    net.neurons[i].theta + std::abs(drive) * net.neurons[i].dt_sub();
                run.max_abs_u = std::max(run.max_abs_u, std::abs(net.states[i].u));
                run.integrator_bound = std::max(run.integrator_bound, bound);
                if (std::abs(net.states[i].u) > bound + 1e-12) run.integrator_bounded = false;
            }
            for (std::size_t i = 0; i < n; ++i) r_prev[i] = net.states[i].r;
        }
        run.decoded.push_back(r_prev);
    }
    run.substeps = substep;
    return run;
}

double nmse(const std::vector<double>& reference, const std::vector<double>& test) {
    if (reference.size() != test.size() || reference.empty())
        throw ShapeError("nmse: series must have equal nonzero length");
    double mean = 0.0;
    for (const double v : reference) mean += v;
    mean /= static_cast<double>(reference.size());

    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < reference.size(); ++t) {
        num += (reference[t] - test[t]) * (reference[t] - test[t]);
        den += (reference[t] - mean) * (reference[t] - mean);
    }
    if (den == 0.0) throw DomainError("nmse: reference has zero variance");
    return num / den;
}

double nmse(const std::vector<Vector>& reference, const std::vector<Vector>& test) {
    if (reference.size() != test.size() || reference.empty())
        throw ShapeError("nmse: series must have equal nonzero length");
    const std::size_t n = reference[0].size();
    Vector mean(n, 0.0);
    for (const Vector& v : reference) {
        if (v.size() != n) throw ShapeError("nmse: ragged reference");
        for (std::size_t i = 0; i < n; ++i) mean[i] += v[i];
    }
    for (std::size_t i = 0; i < n; ++i) mean[i] /= static_cast<double>(reference.size());

    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < reference.size(); ++t) {
        if (test[t].size() != n) throw ShapeError("nmse: ragged test");
        for (std::size_t i = 0; i < n; ++i) {
            num += (reference[t][i] - test[t][i]) * (reference[t][i] - test[t][i]);
            den += (reference[t][i] - mean[i]) * (reference[t][i] - mean[i]);
        }
    }
    if (den == 0.0) throw DomainError("nmse: reference has zero variance");
    return num / den;
}

SpikeCountReport spike_count_report(const SnnRun& run, std::size_t oversampling) {
    SpikeCountReport report;
    report.per_unit.resize(run.spikes.size(), 0);
    report.per_unit_positive.resize(run.spikes.size(), 0);
    report.per_unit_negative.resize(run.spikes.size(), 0);
    for (std::size_t i = 0; i < run.spikes.size(); ++i) {
        for (const SpikeEvent& ev : run.spikes[i].events) {
            report.per_unit[i] += 1;
            if (ev.sign > 0)
                report.per_unit_positive[i] += 1;
            else
                report.per_unit_negative[i] += 1;
        }
        report.total += report.per_unit[i];
    }
    const double steps =
        oversampling > 0 ? static_cast<double>(run.substeps) / static_cast<double>(oversampling)
                         : 0.0;
    report.spikes_per_step = steps > 0.0 ? static_cast<double>(report.total) / steps : 0.0;
    return report;
}

HighbandResult highband_residual_check(const std::vector<double>& reference,
                                       const std::vector<double>& test, double alpha_smooth) {
    HighbandResult out;
    out.nmse_raw = nmse(reference, test);
    const auto ref_smooth = lowpass_signal(reference, alpha_smooth, reference.front());
    const auto test_smooth = lowpass_signal(test, alpha_smooth, test.front());
    out.nmse_smoothed = nmse(ref_smooth, test_smooth);
    return out;
}

}  // namespace lprnn
