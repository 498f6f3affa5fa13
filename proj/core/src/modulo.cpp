#include "usres/modulo.hpp"

#include <cmath>
#include <stdexcept>

#include "usres/rng.hpp"

namespace usres {

std::string to_string(AdcMode mode) {
    return mode == AdcMode::modulo ? "modulo" : "conventional";
}

AdcMode adc_mode_from_string(const std::string& name) {
    if (name == "modulo") return AdcMode::modulo;
    if (name == "conventional") return AdcMode::conventional;
    throw std::invalid_argument("unknown ADC mode: " + name);
}

void AcquisitionConfig::validate() const {
    if (lambda <= 0.0) throw std::invalid_argument("AcquisitionConfig: lambda must be > 0");
    if (bits < 0 || bits > 24) throw std::invalid_argument("AcquisitionConfig: bits must be in [0, 24]");
    if (mode == AdcMode::conventional && full_scale <= 0.0) {
        throw std::invalid_argument("AcquisitionConfig: conventional mode needs full_scale > 0");
    }
    if (noise_sigma < 0.0) throw std::invalid_argument("AcquisitionConfig: noise_sigma must be >= 0");
}

double modulo_fold(double x, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("modulo_fold: lambda must be > 0");
    const double u = x / (2.0 * lambda) + 0.5;
    const double frac = u - std::floor(u);
    return 2.0 * lambda * (frac - 0.5);
}

double quantize_uniform(double x, int bits, double full_scale) {
    if (bits < 1) throw std::invalid_argument("quantize_uniform: bits must be >= 1");
    if (full_scale <= 0.0) throw std::invalid_argument("quantize_uniform: full_scale must be > 0");
    const double delta = 2.0 * full_scale / static_cast<double>(1 << bits);
    const double level = delta * (std::floor(x / delta) + 0.5);
    const double top = full_scale - delta / 2.0;
    return std::min(std::max(level, -top), top);
}

double clip(double x, double full_scale) {
    if (full_scale <= 0.0) throw std::invalid_argument("clip: full_scale must be > 0");
    return std::min(std::max(x, -full_scale), full_scale);
}

double residue_quantize(double x, double lambda) {
    if (lambda <= 0.0) throw std::invalid_argument("residue_quantize: lambda must be > 0");
    return 2.0 * lambda * std::floor((x + lambda) / (2.0 * lambda));
}

ModularDecomposition modular_decompose(const std::vector<double>& g, double lambda) {
    ModularDecomposition out;
    out.folded.reserve(g.size());
    out.residue.reserve(g.size());
    for (double x : g) {
        const double f = modulo_fold(x, lambda);
        out.folded.push_back(f);
        out.residue.push_back(x - f);
    }
    return out;
}

ResidueModel residue_spikes(const std::vector<double>& residue) {
    ResidueModel model;
    for (std::size_t n = 0; n + 1 < residue.size(); ++n) {
        const double jump = residue[n + 1] - residue[n];
        if (jump != 0.0) {
            model.amplitudes.push_back(jump);
            model.positions.push_back(static_cast<int>(n));
        }
    }
    return model;
}

FoldedSignal acquire(const std::vector<double>& g, double step, const AcquisitionConfig& cfg) {
    cfg.validate();
    if (step <= 0.0) throw std::invalid_argument("acquire: step must be > 0");

    FoldedSignal out;
    out.step = step;
    out.lambda = cfg.lambda;
    out.bits = cfg.bits;
    out.mode = cfg.mode;
    out.full_scale = cfg.mode == AdcMode::conventional ? cfg.full_scale : cfg.lambda;
    out.seed = cfg.seed;
    out.values.reserve(g.size());

    const CounterRng noise(CounterRng::derive_key({cfg.seed}));
    for (std::size_t n = 0; n < g.size(); ++n) {
        double x = g[n];
        if (cfg.noise_sigma > 0.0) x += cfg.noise_sigma * noise.normal_at(n);
        if (cfg.mode == AdcMode::modulo) {
            x = modulo_fold(x, cfg.lambda);
            if (cfg.bits > 0) x = quantize_uniform(x, cfg.bits, cfg.lambda);
        } else {
            x = clip(x, cfg.full_scale);
            if (cfg.bits > 0) x = quantize_uniform(x, cfg.bits, cfg.full_scale);
        }
        out.values.push_back(x);
    }
    return out;
}

}  // namespace usres
