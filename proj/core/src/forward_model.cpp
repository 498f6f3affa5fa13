#include "usres/forward_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace usres {

double SpikeTrain::tv_norm() const {
    double sum = 0.0;
    for (double a : amplitudes) sum += std::abs(a);
    return sum;
}

void SpikeTrain::validate(double window) const {
    if (amplitudes.size() != delays.size()) {
        throw std::invalid_argument("SpikeTrain: amplitudes/delays size mismatch");
    }
    for (std::size_t k = 0; k < delays.size(); ++k) {
        if (amplitudes[k] == 0.0) throw std::invalid_argument("SpikeTrain: zero amplitude");
        if (delays[k] < 0.0 || delays[k] >= window) {
            throw std::invalid_argument("SpikeTrain: delay outside [0, window)");
        }
        if (k > 0 && delays[k] <= delays[k - 1]) {
            throw std::invalid_argument("SpikeTrain: delays must be strictly increasing");
        }
    }
}

SampledSignal synthesize(const SpikeTrain& spikes, const KernelModel& kernel, double step,
                         int count) {
    if (step <= 0.0 || count < 1) {
        throw std::invalid_argument("synthesize: need step > 0 and count >= 1");
    }
    const double window = step * count;
    spikes.validate(window);
    const Interval sup = kernel.support();
    for (double tau : spikes.delays) {
        if (tau + sup.lo < 0.0 || tau + sup.hi >= window) {
            throw std::invalid_argument(
                "synthesize: translated kernel leaves the observation window (truncation)");
        }
    }

    SampledSignal out;
    out.step = step;
    out.values.assign(static_cast<std::size_t>(count), 0.0);
    for (int k = 0; k < spikes.count(); ++k) {
        const double amp = spikes.amplitudes[static_cast<std::size_t>(k)];
        const double tau = spikes.delays[static_cast<std::size_t>(k)];
        // Only samples inside the translated support contribute.
        const int lo = std::max(0, static_cast<int>(std::ceil((tau + sup.lo) / step)));
        const int hi = std::min(count - 1, static_cast<int>(std::floor((tau + sup.hi) / step)));
        for (int n = lo; n <= hi; ++n) {
            out.values[static_cast<std::size_t>(n)] += amp * kernel_eval(kernel, n * step - tau);
        }
    }
    return out;
}

SampledSignal render(const SpikeTrain& spikes, const KernelModel& kernel, double step, int count) {
    if (step <= 0.0 || count < 1) {
        throw std::invalid_argument("render: need step > 0 and count >= 1");
    }
    if (spikes.amplitudes.size() != spikes.delays.size()) {
        throw std::invalid_argument("render: amplitudes/delays size mismatch");
    }
    const Interval sup = kernel.support();
    SampledSignal out;
    out.step = step;
    out.values.assign(static_cast<std::size_t>(count), 0.0);
    for (std::size_t k = 0; k < spikes.delays.size(); ++k) {
        const double amp = spikes.amplitudes[k];
        const double tau = spikes.delays[k];
        const int lo = std::max(0, static_cast<int>(std::ceil((tau + sup.lo) / step)));
        const int hi = std::min(count - 1, static_cast<int>(std::floor((tau + sup.hi) / step)));
        for (int n = lo; n <= hi; ++n) {
            out.values[static_cast<std::size_t>(n)] += amp * kernel_eval(kernel, n * step - tau);
        }
    }
    return out;
}

SpikeTrain make_tof_scene(const SceneSpec& spec) {
    if (spec.distances_m.size() != spec.reflectivities.size()) {
        throw std::invalid_argument("make_tof_scene: distances/reflectivities size mismatch");
    }
    SpikeTrain out;
    for (std::size_t k = 0; k < spec.distances_m.size(); ++k) {
        const double d = spec.distances_m[k];
        if (d <= 0.0) throw std::invalid_argument("make_tof_scene: distances must be > 0");
        if (k > 0 && d <= spec.distances_m[k - 1]) {
            throw std::invalid_argument("make_tof_scene: distances must be strictly increasing");
        }
        out.delays.push_back(2.0 * d / kSpeedOfLight);
        out.amplitudes.push_back(spec.reflectivities[k]);
    }
    return out;
}

Fidelity fidelity(const std::vector<double>& reference, const std::vector<double>& estimate) {
    if (reference.size() != estimate.size() || reference.empty()) {
        throw std::invalid_argument("fidelity: sequences must be non-empty and equal length");
    }
    double acc = 0.0;
    double peak = 0.0;
    for (std::size_t n = 0; n < reference.size(); ++n) {
        const double d = reference[n] - estimate[n];
        acc += d * d;
        peak = std::max(peak, std::abs(reference[n]));
    }
    Fidelity out;
    out.mse = acc / static_cast<double>(reference.size());
    out.psnr_db = out.mse == 0.0 ? std::numeric_limits<double>::infinity()
                                 : 10.0 * std::log10(peak * peak / out.mse);
    return out;
}

}  // namespace usres
