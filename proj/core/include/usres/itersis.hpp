#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "usres/forward_model.hpp"
#include "usres/kernels.hpp"
#include "usres/modulo.hpp"
#include "usres/spectral.hpp"

namespace usres {

/// Rational parametrization of a spike sequence on the unit-circle node
/// grid: eps[n] ~ P(z_n)/Q(z_n) with deg P <= M-1, deg Q <= M. A pole of
/// Q near the node z_{n_m} produces a spike at position n_m whose
/// amplitude is the complex-analytic residue of P/Q there.
struct RationalFraction {
    std::vector<std::complex<double>> numerator;    ///< p coefficients, ascending degree
    std::vector<std::complex<double>> denominator;  ///< q coefficients, ascending degree

    int fold_order() const { return static_cast<int>(denominator.size()) - 1; }
};

struct ItersisConfig {
    int outer_max = 30;      ///< residue/spike alternations
    int inner_max = 20;      ///< weighted LS refinements per initialization
    int init_count = 8;      ///< random denominator seeds per outer pass
    double sigma_stop = 0;   ///< stop when successive first differences agree to sigma
    int spectral_count = 0;  ///< I_fr; 0 = auto (min(2K+8, usable bins))
    int fold_count = 0;      ///< M, number of fold spikes (0 = in-range signal)
    int order = 1;           ///< K, number of signal spikes
    std::uint64_t seed = 0;

    void validate() const;

    /// Default stopping threshold: the folded-signal quantization step
    /// 2*lambda/2^bits (a tiny positive floor when bits == 0).
    static double default_sigma(double lambda, int bits);
};

/// Evaluates P(z_n)/Q(z_n) at the node_count unit-circle nodes
/// z_n = e^{j 2 pi n / node_count}. Throws degeneracy_error when a pole
/// sits on a node (|Q(z_n)| below 1e-12 of the coefficient scale).
std::vector<std::complex<double>> rational_eval(const RationalFraction& frac, int node_count);

/// Extracts the fold spikes encoded by a fraction: amplitudes from the
/// residue formula, snapped to 2*lambda*Z, positions from the root
/// angles. Spikes whose amplitude quantizes to zero are dropped.
ResidueModel residue_parameters(const RationalFraction& frac, double lambda, int node_count);

/// One weighted least-squares refinement: with the previous denominator
/// fixed as the weight, minimizes the linearized fit residual subject to
/// the normalization <q_seed, q> = 1 (closed form via ridge-stabilized
/// normal equations).
RationalFraction iteration_step(const std::vector<double>& target,
                                const std::vector<std::complex<double>>& q_prev,
                                const std::vector<std::complex<double>>& q_seed, int fold_count);

struct DcEstimate {
    double value = 0.0;
    bool sign_ambiguous = false;
};

/// Constant offset of a spectrum whose DC bin is only known up to an
/// additive constant: the Toeplitz matrix of the true K-spike spectrum is
/// Hermitian of rank K, so the offset appears as the eigenvalue of
/// smallest magnitude. Input must carry consecutive indices 0..m, m >= K.
DcEstimate estimate_dc(const SpectralSamples& s_tilde, int order);

/// Spike estimation from an estimate of the first-differenced signal:
/// anti-difference, deconvolve by the sampled kernel spectrum, fix the
/// unknown DC bin, then matrix-pencil delays and least-squares amplitudes.
SpikeTrain solve_p2(const std::vector<double>& unfolded, const KernelModel& kernel, double step,
                    int order, int spectral_count);

struct IterationRecord {
    int iter = 0;
    double mse = 0.0;        ///< selected candidate MSE against the current target
    double stop_norm = 0.0;  ///< sup-norm change of the differenced estimate (NaN at iter 1)
};

struct ItersisResult {
    SpikeTrain spikes;
    ResidueModel residue;
    RationalFraction fraction;
    std::vector<IterationRecord> trace;
    /// Candidate MSEs in scan order per outer iteration (selection diagnostics).
    std::vector<std::vector<double>> candidate_mse;
    bool converged = false;
};

/// Robust off-the-grid recovery from folded, quantized, noisy samples by
/// alternating fold-residue recovery (rational fit + quantization) and
/// spike estimation, stopping when successive difference-domain
/// reconstructions agree to sigma_stop.
ItersisResult itersis_recover(const FoldedSignal& y, const KernelModel& kernel,
                              const ItersisConfig& cfg);

}  // namespace usres
