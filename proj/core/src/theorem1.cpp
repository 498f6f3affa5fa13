#include "usres/theorem1.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "usres/errors.hpp"
#include "usres/spectral.hpp"

namespace usres {

using std::numbers::pi;

void Theorem1Params::validate() const {
    if (spike_count < 1) throw std::invalid_argument("Theorem1Params: K must be >= 1");
    if (kernel_order < 1) throw std::invalid_argument("Theorem1Params: L must be >= 1");
    if (diff_order < 1 || diff_order > kernel_order) {
        throw std::invalid_argument("Theorem1Params: h must be in [1, L]");
    }
    if (zeta < 1.0) throw std::invalid_argument("Theorem1Params: zeta must be >= 1");
    if (gamma <= 0.0 || lambda <= 0.0 || tv_norm <= 0.0 || kernel_sup <= 0.0 || window <= 0.0) {
        throw std::invalid_argument("Theorem1Params: magnitudes must be positive");
    }
}

double max_sampling_step(const Theorem1Params& p) {
    p.validate();
    const double rate_term =
        p.window / (p.kernel_order + 2.0 * p.zeta * p.spike_count);
    const double ratio = favard_constant(p.kernel_order) * p.lambda /
                         (favard_constant(p.kernel_order - p.diff_order) * p.tv_norm *
                          p.kernel_sup);
    const double shrink_term =
        p.gamma / pi * std::pow(ratio, 1.0 / static_cast<double>(p.diff_order));
    return std::min(rate_term, shrink_term);
}

std::vector<double> unfold_by_differences(const FoldedSignal& y, int order, double lambda) {
    std::vector<double> diff = finite_difference(y.values, order);
    for (double& v : diff) v = modulo_fold(v, lambda);
    return diff;
}

SpikeTrain recover_exact(const FoldedSignal& y, const KernelModel& kernel,
                         const Theorem1Params& p) {
    p.validate();
    kernel.validate();
    const int n = y.count();
    const int h = p.diff_order;
    if (n <= h + 1) throw std::invalid_argument("recover_exact: too few samples");

    // M_lambda(Delta^h y) == Delta^h g under the sampling-step bound.
    const std::vector<double> diff = unfold_by_differences(y, h, p.lambda);
    SampledSignal d;
    d.values = diff;
    d.step = y.step;
    const int nd = d.count();

    int spectral = p.spectral_count > 0 ? p.spectral_count : 2 * p.spike_count + 8;
    spectral = std::min(spectral, (nd - 1) / 2);
    if (spectral < 2 * p.spike_count) {
        throw std::invalid_argument("recover_exact: too few usable spectral bins (I_fr < 2K)");
    }

    const std::vector<std::complex<double>> kernel_dft =
        periodized_kernel_dft(kernel, y.step, nd, h, spectral);
    const SpectralSamples sos = sos_from_samples(d, kernel_dft, spectral);

    const AnnihilatingFilter filter = annihilating_filter(sos, p.spike_count);
    if (filter.degenerate) {
        throw degeneracy_error("recover_exact: annihilating filter is rank degenerate");
    }
    const DelayEstimates est = delays_from_filter(filter.coeffs, sos.window);
    if (est.degenerate) {
        throw degeneracy_error("recover_exact: coincident delay roots");
    }

    const AmplitudeFit fit = amplitudes_ls(conj_extend(sos), est.delays);

    SpikeTrain out;
    out.delays = est.delays;
    out.amplitudes = fit.amplitudes;
    return out;
}

}  // namespace usres
