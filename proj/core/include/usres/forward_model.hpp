#pragma once

#include <vector>

#include "usres/kernels.hpp"

namespace usres {

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

/// Sparse spike train: amplitudes Gamma[k] at continuous delays tau[k].
struct SpikeTrain {
    std::vector<double> amplitudes;  ///< volts
    std::vector<double> delays;      ///< seconds, strictly increasing

    int count() const { return static_cast<int>(amplitudes.size()); }
    /// Total-variation norm: sum of absolute amplitudes.
    double tv_norm() const;
    void validate(double window) const;
};

/// Uniformly sampled real signal.
struct SampledSignal {
    std::vector<double> values;
    double step = 1.0;  ///< seconds

    int count() const { return static_cast<int>(values.size()); }
    double window() const { return step * static_cast<double>(values.size()); }
};

/// Ranging scene: targets at given distances with given reflectivities.
struct SceneSpec {
    std::vector<double> distances_m;     ///< strictly increasing, > 0
    std::vector<double> reflectivities;  ///< unitless
};

/// Samples g[n] = sum_k Gamma[k] * psi(n*step - tau[k]), n in [0, count).
/// Every translated kernel must sit fully inside the observation window
/// [0, count*step); violations throw std::invalid_argument since the
/// clipped waveform would silently break downstream spectral fits.
SampledSignal synthesize(const SpikeTrain& spikes, const KernelModel& kernel, double step,
                         int count);

/// Round-trip optical delays tau[k] = 2 d[k] / c, amplitudes from the
/// reflectivities.
SpikeTrain make_tof_scene(const SceneSpec& spec);

/// Samples the spike/kernel model without the window checks of
/// synthesize(); for rendering estimated trains whose delays may sit
/// anywhere (truncation is then the caller's concern).
SampledSignal render(const SpikeTrain& spikes, const KernelModel& kernel, double step, int count);

struct Fidelity {
    double mse = 0.0;
    double psnr_db = 0.0;  ///< +infinity when the sequences coincide
};

/// mse = (1/N) sum |ref - est|^2; psnr = 10 log10(max(ref)^2 / mse).
Fidelity fidelity(const std::vector<double>& reference, const std::vector<double>& estimate);

}  // namespace usres
