#include "usres/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

namespace usres {
namespace {

using std::numbers::pi;
using complexd = std::complex<double>;

// Alternating-series acceleration (Cohen, Rodriguez Villegas, Zagier 2000).
// Converges like (3 + sqrt 8)^-n for totally monotone terms, so n = 28
// reaches full double precision regardless of how slowly the raw series
// decays.
template <typename TermFn>
double accelerated_alternating_sum(TermFn term, int n) {
    double d = std::pow(3.0 + std::sqrt(8.0), n);
    d = (d + 1.0 / d) / 2.0;
    double b = -1.0;
    double c = -d;
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        c = b - c;
        s += c * term(k);
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0));
    }
    return s / d;
}

// Direct partial sum of sum_{p>=0} (2p+1)^{-s} with an Euler-Maclaurin
// tail correction. Valid for s >= 2; the tail terms shrink like
// (2P)^{-s-2j+1} so the truncation error is far below 1e-12.
double odd_zeta(int s) {
    constexpr int kHead = 64;
    double sum = 0.0;
    for (int p = 0; p < kHead; ++p) sum += std::pow(2.0 * p + 1.0, -s);
    const double x = 2.0 * kHead + 1.0;  // evaluate tail from p = kHead
    const double sd = s;
    const double f = std::pow(x, -sd);
    const double integral = std::pow(x, 1.0 - sd) / (2.0 * (sd - 1.0));
    const double f1 = -2.0 * sd * std::pow(x, -sd - 1.0);
    const double f3 = -8.0 * sd * (sd + 1.0) * (sd + 2.0) * std::pow(x, -sd - 3.0);
    return sum + integral + f / 2.0 - f1 / 12.0 + f3 / 720.0;
}

}  // namespace

double favard_constant(int order) {
    if (order < 0) throw std::invalid_argument("favard_constant: order must be >= 0");
    const int s = order + 1;
    double series;
    if (order % 2 == 0) {
        // (-1)^{p(L+1)} alternates when L+1 is odd.
        series = accelerated_alternating_sum(
            [s](int p) { return std::pow(2.0 * p + 1.0, -s); }, 28);
    } else {
        series = odd_zeta(s);
    }
    return 4.0 / pi * series;
}

namespace {

double one_sided_power(double x, int order) {
    if (order == 0) return x > 0.0 ? 1.0 : 0.0;
    return x > 0.0 ? std::pow(x, order) : 0.0;
}

}  // namespace

double bspline_eval(double t, int order) {
    if (order < 0) throw std::invalid_argument("bspline_eval: order must be >= 0");
    const double half_support = (order + 1) / 2.0;
    if (std::abs(t) >= half_support) return 0.0;

    double factorial = 1.0;
    for (int k = 2; k <= order; ++k) factorial *= k;

    double sum = 0.0;
    double binom = 1.0;  // C(order+1, k), updated incrementally
    for (int k = 0; k <= order + 1; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        sum += sign * binom * one_sided_power(t - k + half_support, order);
        binom = binom * (order + 1 - k) / (k + 1);
    }
    return sum / factorial;
}

void KernelModel::validate() const {
    if (gamma <= 0.0) throw std::invalid_argument("KernelModel: gamma must be > 0");
    if (order < 0) throw std::invalid_argument("KernelModel: order must be >= 0");
    if (coeffs.empty()) throw std::invalid_argument("KernelModel: coeffs must be non-empty");
    const bool all_zero =
        std::all_of(coeffs.begin(), coeffs.end(), [](double b) { return b == 0.0; });
    if (all_zero) throw std::invalid_argument("KernelModel: coeffs must not be all zero");
}

Interval KernelModel::support() const {
    validate();
    std::size_t first = 0;
    while (coeffs[first] == 0.0) ++first;
    std::size_t last = coeffs.size() - 1;
    while (coeffs[last] == 0.0) --last;
    const double half = (order + 1) / 2.0;
    return {gamma * (static_cast<double>(first) - half),
            gamma * (static_cast<double>(last) + half)};
}

double kernel_eval(const KernelModel& model, double t) {
    const double u = t / model.gamma;
    const double half = (model.order + 1) / 2.0;
    // Only translates with |u - l| < half contribute.
    const int lo = std::max(0, static_cast<int>(std::ceil(u - half)));
    const int hi = std::min(static_cast<int>(model.coeffs.size()) - 1,
                            static_cast<int>(std::floor(u + half)));
    double sum = 0.0;
    for (int l = lo; l <= hi; ++l) {
        const double b = model.coeffs[static_cast<std::size_t>(l)];
        if (b != 0.0) sum += b * bspline_eval(u - l, model.order);
    }
    return sum;
}

double kernel_sup_norm(const KernelModel& model) {
    const Interval s = model.support();
    const double step = model.gamma / 1000.0;
    const int n = static_cast<int>(std::ceil(s.width() / step));
    double best = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = s.lo + std::min(s.width(), i * step);
        best = std::max(best, std::abs(kernel_eval(model, t)));
    }
    return best;
}

double kernel_area(const KernelModel& model) {
    model.validate();
    double sum = 0.0;
    for (double b : model.coeffs) sum += b;
    return model.gamma * sum;
}

namespace {

// Recursive adaptive Simpson on a complex-valued integrand.
template <typename Fn>
complexd simpson_recurse(const Fn& f, double a, complexd fa, double b, complexd fb,
                         double m, complexd fm, complexd whole, double tol, int depth) {
    const double lm = (a + m) / 2.0;
    const double rm = (m + b) / 2.0;
    const complexd flm = f(lm);
    const complexd frm = f(rm);
    const complexd left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const complexd right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const complexd delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           simpson_recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

template <typename Fn>
complexd adaptive_simpson(const Fn& f, double a, double b, double tol) {
    const double m = (a + b) / 2.0;
    const complexd fa = f(a);
    const complexd fb = f(b);
    const complexd fm = f(m);
    const complexd whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_recurse(f, a, fa, b, fb, m, fm, whole, tol, 40);
}

// Breakpoints of the piecewise-polynomial kernel within its support.
std::vector<double> kernel_knots(const KernelModel& model) {
    const Interval s = model.support();
    const double half = (model.order + 1) / 2.0;
    std::set<double> knots;
    knots.insert(s.lo);
    knots.insert(s.hi);
    for (std::size_t l = 0; l < model.coeffs.size(); ++l) {
        for (int k = 0; k <= model.order + 1; ++k) {
            const double t = model.gamma * (static_cast<double>(l) - half + k);
            if (t > s.lo && t < s.hi) knots.insert(t);
        }
    }
    return {knots.begin(), knots.end()};
}

}  // namespace

FourierCoeffs kernel_fourier_coeffs(const KernelModel& model, double window, int max_index) {
    model.validate();
    if (window <= 0.0) throw std::invalid_argument("kernel_fourier_coeffs: window must be > 0");
    if (max_index < 0) throw std::invalid_argument("kernel_fourier_coeffs: max_index must be >= 0");
    const Interval s = model.support();
    if (s.width() > window) {
        throw std::invalid_argument(
            "kernel_fourier_coeffs: kernel support exceeds the window; coefficients would be "
            "biased by truncation");
    }

    // Translate so the support sits at [0, width) inside [0, window).
    // |psi_hat_i| and psi_hat_0 are translation invariant.
    const double shift = -s.lo;
    std::vector<double> knots = kernel_knots(model);
    for (double& t : knots) t += shift;

    // Tolerance scaled to the natural coefficient magnitude.
    double l1 = 0.0;
    for (double b : model.coeffs) l1 += std::abs(b);
    const double scale = std::max(l1 * model.gamma / window, 1e-300);
    const double tol_total = 1e-12 * scale;

    FourierCoeffs out;
    out.max_index = max_index;
    out.window = window;
    out.values.assign(2 * static_cast<std::size_t>(max_index) + 1, complexd{0.0, 0.0});

    for (int i = 0; i <= max_index; ++i) {
        const double omega = 2.0 * pi * i / window;
        complexd acc{0.0, 0.0};
        for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
            const double a = knots[p];
            const double b = knots[p + 1];
            const double tol = tol_total * (b - a) / (knots.back() - knots.front());
            acc += adaptive_simpson(
                [&](double u) {
                    return kernel_eval(model, u - shift) *
                           std::exp(complexd{0.0, -omega * u});
                },
                a, b, tol);
        }
        const complexd value = acc / window;
        out.values[static_cast<std::size_t>(max_index + i)] = value;
        out.values[static_cast<std::size_t>(max_index - i)] = std::conj(value);
    }
    return out;
}

double approximation_error_bound(const KernelModel& model, double window, int max_index) {
    model.validate();
    if (model.order < 1) {
        throw std::invalid_argument(
            "approximation_error_bound: order 0 degenerates the tail exponent");
    }
    if (max_index < 1) throw std::invalid_argument("approximation_error_bound: max_index must be >= 1");
    if (window <= 0.0) throw std::invalid_argument("approximation_error_bound: window must be > 0");
    const int L = model.order;
    const double kl = favard_constant(L);
    const double sup = kernel_sup_norm(model);
    return std::pow(window / (2.0 * model.gamma), 2.0 * L) * 2.0 * sup * sup /
           (kl * kl * (2.0 * L - 1.0) * std::pow(static_cast<double>(max_index), 2.0 * L - 1.0));
}

double derivative_sup_bound(const KernelModel& model, int h) {
    model.validate();
    if (h < 0 || h > model.order) {
        throw std::invalid_argument("derivative_sup_bound: requires 0 <= h <= order");
    }
    const double ratio = favard_constant(model.order - h) / favard_constant(model.order);
    return ratio * std::pow(pi / model.gamma, h) * kernel_sup_norm(model);
}

}  // namespace usres
