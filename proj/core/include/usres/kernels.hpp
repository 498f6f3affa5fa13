#pragma once

#include <complex>
#include <vector>

namespace usres {

/// Closed interval on the time axis, in seconds.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

/// Spline kernel living in a shift-invariant space: a finite combination
/// of order-L cardinal B-splines on a grid of scale gamma,
///
///   psi(t) = sum_l b[l] * beta_L(t / gamma - l),   l = 0, 1, ...
///
/// The kernel is compactly supported; support() reports the exact
/// interval outside of which it evaluates to zero.
struct KernelModel {
    std::vector<double> coeffs;  ///< b[l], grid positions l = 0, 1, ...
    double gamma = 1.0;          ///< grid scale (seconds), > 0
    int order = 0;               ///< spline order L, >= 0

    /// Throws std::invalid_argument if the model violates its invariants
    /// (gamma <= 0, negative order, empty or all-zero coefficients).
    void validate() const;

    /// Exact support interval in seconds. Width equals
    /// gamma * (L + 1 + span of nonzero coefficients).
    Interval support() const;
};

/// Complex Fourier-series coefficients of a kernel over a window of
/// length `window` seconds, indexed i in [-max_index, max_index].
struct FourierCoeffs {
    std::vector<std::complex<double>> values;  ///< index i stored at i + max_index
    int max_index = 0;
    double window = 0.0;

    std::complex<double> at(int i) const { return values.at(static_cast<std::size_t>(i + max_index)); }
};

/// Bohr-Favard constant K_L = (4/pi) * sum_{p>=0} ((-1)^p / (2p+1))^{L+1},
/// evaluated to absolute accuracy better than 1e-12. Closed forms for
/// small orders: K_0 = 1, K_1 = pi/2, K_2 = pi^2/8.
double favard_constant(int order);

/// Centered cardinal B-spline beta_L(t) from its one-sided power
/// expansion. Exactly zero for |t| >= (L+1)/2.
double bspline_eval(double t, int order);

/// Kernel value psi(t) = sum_l b[l] beta_L(t/gamma - l).
double kernel_eval(const KernelModel& model, double t);

/// Sup norm estimated on a dense grid over the support (step gamma/1000).
double kernel_sup_norm(const KernelModel& model);

/// Exact integral of the kernel: gamma * sum_l b[l] (B-splines have unit area).
double kernel_area(const KernelModel& model);

/// Fourier coefficients psi_hat_i = (1/window) <psi, e^{j 2 pi i t / window}>
/// computed by adaptive composite Simpson quadrature over the support
/// (relative accuracy 1e-10 per coefficient). The kernel is translated so
/// that its support sits inside [0, window); a pure translation leaves
/// |psi_hat_i| and psi_hat_0 unchanged. Throws std::invalid_argument if
/// the support is wider than the window.
FourierCoeffs kernel_fourier_coeffs(const KernelModel& model, double window, int max_index);

/// Truncation error bound for the 2I+1 term Fourier approximation:
///
///   rho_L = (window / 2 gamma)^(2L) * 2 K_L^{-2} ||psi||_inf^2
///           / ((2L - 1) * I^(2L-1)),
///
/// the mean-squared error over one window is guaranteed <= rho_L.
/// Requires order >= 1 and max_index >= 1.
double approximation_error_bound(const KernelModel& model, double window, int max_index);

/// Sup-norm bound on the h-th kernel derivative,
///   ||psi^(h)||_inf <= (K_{L-h} / K_L) * (pi / gamma)^h * ||psi||_inf,
/// valid for 0 <= h <= L. Throws std::invalid_argument for h > L.
double derivative_sup_bound(const KernelModel& model, int h);

}  // namespace usres
