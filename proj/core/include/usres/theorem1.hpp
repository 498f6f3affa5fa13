#pragma once

#include "usres/forward_model.hpp"
#include "usres/kernels.hpp"
#include "usres/modulo.hpp"

namespace usres {

/// Parameters of the exact-recovery sampling bound.
struct Theorem1Params {
    int spike_count = 1;      ///< K
    int kernel_order = 1;     ///< L
    int diff_order = 1;       ///< h in [1, L]: difference order used to unfold
    double gamma = 1.0;       ///< kernel grid scale, seconds
    double lambda = 1.0;      ///< folding threshold, volts
    double zeta = 1.0;        ///< oversampling factor >= 1
    double tv_norm = 1.0;     ///< sum_k |Gamma[k]|, volts
    double kernel_sup = 1.0;  ///< ||psi||_inf, volts
    double window = 1.0;      ///< tau = N T, seconds
    int spectral_count = 0;   ///< I_fr; 0 = auto (min(2K+8, usable bins))

    void validate() const;
};

/// Largest sampling step with guaranteed exact recovery:
///
///   T <= min( window / (L + 2 zeta K),
///             (gamma/pi) * (K_L lambda / (K_{L-h} ||s||_TV ||psi||_inf))^(1/h) ).
double max_sampling_step(const Theorem1Params& p);

/// Re-folds the order-h finite difference of the folded samples. When the
/// caller has enforced ||Delta^h g||_inf <= lambda via max_sampling_step,
/// the result equals Delta^h of the unfolded signal exactly; otherwise
/// the output is silently corrupted, so validate T first.
std::vector<double> unfold_by_differences(const FoldedSignal& y, int order, double lambda);

/// Noiseless exact recovery: difference-domain unfolding, deconvolution by
/// the sampled kernel's difference spectrum, annihilating-filter delay
/// retrieval, and least-squares amplitudes.
SpikeTrain recover_exact(const FoldedSignal& y, const KernelModel& kernel,
                         const Theorem1Params& p);

}  // namespace usres
