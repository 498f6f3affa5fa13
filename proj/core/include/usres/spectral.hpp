#pragma once

#include <complex>
#include <vector>

#include "usres/forward_model.hpp"
#include "usres/kernels.hpp"

namespace usres {

/// Spectral samples s_hat[l] on an explicit integer index set, tied to a
/// time window so that pole arguments map back to delays in seconds.
struct SpectralSamples {
    std::vector<std::complex<double>> values;
    std::vector<int> indices;  ///< same length as values, strictly increasing
    double window = 1.0;       ///< seconds

    int count() const { return static_cast<int>(values.size()); }
    bool consecutive() const;
};

/// h-fold repeated first difference; output length N - h.
std::vector<double> finite_difference(const std::vector<double>& x, int order);

/// Cumulative sum prefixed with `initial`; exact inverse of a single
/// finite difference up to the integration constant.
std::vector<double> anti_difference(const std::vector<double>& dx, double initial);

/// Single DFT bin sum_n x[n] e^{-j 2 pi l n / N}.
std::complex<double> dft_bin(const std::vector<double>& x, int l);

/// DFT bins 0..max_index of the order-`diff_order` finite difference of
/// the kernel sampled on an n in [0, length) grid, periodized with period
/// length*step. This is the deconvolution reference for sampled spike
/// trains: translates of the kernel that stay inside the window share
/// these spectra exactly up to the spike phase factors.
std::vector<std::complex<double>> periodized_kernel_dft(const KernelModel& kernel, double step,
                                                        int length, int diff_order,
                                                        int max_index);

/// Sum-of-sinusoids samples s_hat[l] = g_hat[l] / kernel_dft[l] for
/// l = 1..max_index (DC excluded; the constant is handled separately).
/// kernel_dft must cover bins 0..max_index. Bins where the kernel
/// spectrum falls below 1e-8 of its peak raise degeneracy_error naming
/// the offending bin.
SpectralSamples sos_from_samples(const SampledSignal& g,
                                 const std::vector<std::complex<double>>& kernel_dft,
                                 int max_index);

/// Mirrors positive-index samples onto negative indices by conjugation
/// (valid for spectra of real sequences).
SpectralSamples conj_extend(const SpectralSamples& s);

struct AnnihilatingFilter {
    std::vector<std::complex<double>> coeffs;  ///< length K+1, coeffs[0] = 1
    bool degenerate = false;                   ///< null space wider than one direction
};

/// Prony annihilating filter from >= 2K consecutive spectral samples:
/// minimal right-singular direction of the convolution Toeplitz system.
AnnihilatingFilter annihilating_filter(const SpectralSamples& s, int model_order);

struct DelayEstimates {
    std::vector<double> delays;                ///< seconds, sorted ascending, in [0, window)
    std::vector<std::complex<double>> roots;   ///< filter roots, diagnostics
    bool degenerate = false;                   ///< root cluster within 1e-6 rad
};

/// Delays tau_k = -window * arg(u_k) / 2 pi from the filter roots u_k
/// (companion-matrix eigenvalues), wrapped into [0, window).
DelayEstimates delays_from_filter(const std::vector<std::complex<double>>& filter,
                                  double window);

struct AmplitudeFit {
    std::vector<double> amplitudes;  ///< real spike amplitudes, delay order
    double condition = 0.0;          ///< Vandermonde condition number
    double imag_residual = 0.0;      ///< discarded imaginary part, relative
    bool ill_conditioned = false;
};

/// Least-squares amplitudes for s_hat[l] = sum_k Gamma[k] e^{-j2 pi l tau_k / window}.
AmplitudeFit amplitudes_ls(const SpectralSamples& s, const std::vector<double>& delays);

/// Matrix-pencil pole estimates from >= 2K+1 consecutive spectral
/// samples; pencil parameter ceil(count/2), rank-K SVD truncation.
std::vector<std::complex<double>> matrix_pencil(const SpectralSamples& s, int model_order);

/// Pole angles mapped to delays -window * arg(u) / 2 pi, wrapped into
/// [0, window) and sorted ascending.
std::vector<double> delays_from_poles(const std::vector<std::complex<double>>& poles,
                                      double window);

/// Roots of sum_k coeffs[k] z^k via the companion matrix. Leading
/// coefficients below 1e-12 of the largest are trimmed.
std::vector<std::complex<double>> polynomial_roots(const std::vector<std::complex<double>>& coeffs);

}  // namespace usres
