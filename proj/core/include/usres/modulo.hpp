#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace usres {

enum class AdcMode { modulo, conventional };

std::string to_string(AdcMode mode);
AdcMode adc_mode_from_string(const std::string& name);

/// Sampled output of the simulated acquisition chain.
struct FoldedSignal {
    std::vector<double> values;  ///< y[n], volts
    double step = 1.0;           ///< sampling step T, seconds
    double lambda = 1.0;         ///< folding threshold, volts
    int bits = 0;                ///< quantizer budget; 0 = unquantized
    AdcMode mode = AdcMode::modulo;
    double full_scale = 0.0;     ///< conventional mode only, volts
    std::uint64_t seed = 0;      ///< noise stream key used at acquisition

    int count() const { return static_cast<int>(values.size()); }
    double window() const { return step * static_cast<double>(values.size()); }
};

/// Staircase fold corrections: amplitude c_m at integer sample position
/// n_m, meaning the first-difference residue sequence has the spike
/// c_m * delta[n - n_m]. Ideal folding keeps every c_m in 2*lambda*Z.
struct ResidueModel {
    std::vector<double> amplitudes;  ///< c_m, volts
    std::vector<int> positions;      ///< n_m, strictly increasing

    int count() const { return static_cast<int>(amplitudes.size()); }
};

struct AcquisitionConfig {
    double lambda = 1.0;
    int bits = 0;  ///< 0..24; 0 skips quantization
    AdcMode mode = AdcMode::modulo;
    double full_scale = 1.0;   ///< conventional mode clip level
    double noise_sigma = 0.0;  ///< Gaussian noise injected before folding
    std::uint64_t seed = 0;

    void validate() const;
};

/// Centered modulo: 2*lambda*(frac(x/2lambda + 1/2) - 1/2), in [-lambda, lambda).
double modulo_fold(double x, double lambda);

/// Mid-rise quantizer with step 2*full_scale/2^bits; output clamped to
/// the representable levels [-full_scale + step/2, full_scale - step/2].
double quantize_uniform(double x, int bits, double full_scale);

/// Saturating clip to [-full_scale, full_scale].
double clip(double x, double full_scale);

/// Snap to the fold grid 2*lambda*Z: 2*lambda*floor((x + lambda)/(2*lambda)).
double residue_quantize(double x, double lambda);

struct ModularDecomposition {
    std::vector<double> folded;
    std::vector<double> residue;  ///< g - folded, elementwise in 2*lambda*Z
};

/// Splits g into its folded part and the staircase residue g - M_lambda(g).
ModularDecomposition modular_decompose(const std::vector<double>& g, double lambda);

/// Spike positions/amplitudes of the first difference of a residue
/// sequence; the ground-truth ResidueModel for a noiseless acquisition.
ResidueModel residue_spikes(const std::vector<double>& residue);

/// Simulated acquisition: add Gaussian noise (deterministic in cfg.seed),
/// then fold (modulo mode) or clip (conventional mode), then quantize.
FoldedSignal acquire(const std::vector<double>& g, double step, const AcquisitionConfig& cfg);

}  // namespace usres
