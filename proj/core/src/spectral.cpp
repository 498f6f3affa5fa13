#include "usres/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "usres/errors.hpp"

namespace usres {

using std::numbers::pi;
using complexd = std::complex<double>;

bool SpectralSamples::consecutive() const {
    for (std::size_t i = 1; i < indices.size(); ++i) {
        if (indices[i] != indices[i - 1] + 1) return false;
    }
    return !indices.empty();
}

std::vector<double> finite_difference(const std::vector<double>& x, int order) {
    if (order < 1) throw std::invalid_argument("finite_difference: order must be >= 1");
    if (static_cast<int>(x.size()) <= order) {
        throw std::invalid_argument("finite_difference: sequence shorter than order + 1");
    }
    std::vector<double> out = x;
    for (int h = 0; h < order; ++h) {
        for (std::size_t n = 0; n + 1 < out.size(); ++n) out[n] = out[n + 1] - out[n];
        out.pop_back();
    }
    return out;
}

std::vector<double> anti_difference(const std::vector<double>& dx, double initial) {
    std::vector<double> out;
    out.reserve(dx.size() + 1);
    out.push_back(initial);
    double acc = initial;
    for (double d : dx) {
        acc += d;
        out.push_back(acc);
    }
    return out;
}

complexd dft_bin(const std::vector<double>& x, int l) {
    const std::size_t n = x.size();
    const double w = -2.0 * pi * l / static_cast<double>(n);
    complexd acc{0.0, 0.0};
    // Rotation recurrence instead of per-sample exp; renormalized rarely
    // enough that the accumulated phase drift stays below 1e-13.
    complexd rot{1.0, 0.0};
    const complexd twiddle = std::polar(1.0, w);
    for (std::size_t k = 0; k < n; ++k) {
        acc += x[k] * rot;
        rot *= twiddle;
        if ((k & 1023u) == 1023u) rot = std::polar(1.0, w * static_cast<double>(k + 1));
    }
    return acc;
}

std::vector<complexd> periodized_kernel_dft(const KernelModel& kernel, double step, int length,
                                            int diff_order, int max_index) {
    if (step <= 0.0 || length < 2) {
        throw std::invalid_argument("periodized_kernel_dft: need step > 0 and length >= 2");
    }
    if (diff_order < 0) throw std::invalid_argument("periodized_kernel_dft: diff_order >= 0");
    const Interval sup = kernel.support();
    const double period = step * length;
    if (sup.width() >= period) {
        throw std::invalid_argument("periodized_kernel_dft: kernel wider than the period");
    }

    std::vector<double> samples(static_cast<std::size_t>(length + diff_order), 0.0);
    for (int n = 0; n < length + diff_order; ++n) {
        const double t = n * step;
        // Periodize: fold every translate overlapping this sample.
        const int m_lo = static_cast<int>(std::ceil((t - sup.hi) / period));
        const int m_hi = static_cast<int>(std::floor((t - sup.lo) / period));
        double acc = 0.0;
        for (int m = m_lo; m <= m_hi; ++m) acc += kernel_eval(kernel, t - m * period);
        samples[static_cast<std::size_t>(n)] = acc;
    }
    if (diff_order > 0) samples = finite_difference(samples, diff_order);

    std::vector<complexd> bins;
    bins.reserve(static_cast<std::size_t>(max_index) + 1);
    for (int l = 0; l <= max_index; ++l) bins.push_back(dft_bin(samples, l));
    return bins;
}

SpectralSamples sos_from_samples(const SampledSignal& g, const std::vector<complexd>& kernel_dft,
                                 int max_index) {
    if (max_index < 1) throw std::invalid_argument("sos_from_samples: max_index must be >= 1");
    if (static_cast<int>(kernel_dft.size()) <= max_index) {
        throw std::invalid_argument("sos_from_samples: kernel_dft must cover bins 0..max_index");
    }
    double peak = 0.0;
    for (const complexd& v : kernel_dft) peak = std::max(peak, std::abs(v));
    const double floor = 1e-8 * peak;

    SpectralSamples out;
    out.window = g.window();
    for (int l = 1; l <= max_index; ++l) {
        const complexd denom = kernel_dft[static_cast<std::size_t>(l)];
        if (std::abs(denom) < floor) {
            throw degeneracy_error("sos_from_samples: kernel spectrum below floor at bin " +
                                   std::to_string(l));
        }
        out.values.push_back(dft_bin(g.values, l) / denom);
        out.indices.push_back(l);
    }
    return out;
}

SpectralSamples conj_extend(const SpectralSamples& s) {
    SpectralSamples out;
    out.window = s.window;
    for (std::size_t i = s.values.size(); i-- > 0;) {
        if (s.indices[i] <= 0) continue;
        out.values.push_back(std::conj(s.values[i]));
        out.indices.push_back(-s.indices[i]);
    }
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (s.indices[i] >= 0) {
            out.values.push_back(s.values[i]);
            out.indices.push_back(s.indices[i]);
        }
    }
    return out;
}

AnnihilatingFilter annihilating_filter(const SpectralSamples& s, int model_order) {
    const int k = model_order;
    if (k < 1) throw std::invalid_argument("annihilating_filter: model order must be >= 1");
    if (!s.consecutive()) {
        throw std::invalid_argument("annihilating_filter: samples must be consecutive");
    }
    const int n = s.count();
    if (n < 2 * k) {
        throw std::invalid_argument("annihilating_filter: need at least 2K spectral samples");
    }

    Eigen::MatrixXcd toeplitz(n - k, k + 1);
    for (int r = 0; r < n - k; ++r) {
        for (int c = 0; c <= k; ++c) {
            toeplitz(r, c) = s.values[static_cast<std::size_t>(r + k - c)];
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(toeplitz, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const Eigen::VectorXcd f = svd.matrixV().col(k);

    AnnihilatingFilter out;
    // More than a one-dimensional null space means coincident spikes or
    // an overestimated model order.
    if (sv.size() >= 2 && sv(sv.size() - 2) <= 1e-10 * sv(0)) out.degenerate = true;
    if (std::abs(f(0)) < 1e-12) {
        out.degenerate = true;
        out.coeffs.assign(f.data(), f.data() + f.size());
        return out;
    }
    out.coeffs.resize(static_cast<std::size_t>(k + 1));
    for (int c = 0; c <= k; ++c) out.coeffs[static_cast<std::size_t>(c)] = f(c) / f(0);
    return out;
}

std::vector<complexd> polynomial_roots(const std::vector<complexd>& coeffs) {
    // Trim negligible leading (highest-degree) coefficients.
    double peak = 0.0;
    for (const complexd& c : coeffs) peak = std::max(peak, std::abs(c));
    if (peak == 0.0) throw std::invalid_argument("polynomial_roots: zero polynomial");
    std::size_t degree = coeffs.size() - 1;
    while (degree > 0 && std::abs(coeffs[degree]) < 1e-12 * peak) --degree;
    if (degree == 0) return {};

    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(degree),
                                                        static_cast<Eigen::Index>(degree));
    const complexd lead = coeffs[degree];
    for (std::size_t i = 0; i < degree; ++i) {
        companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(degree - 1)) =
            -coeffs[i] / lead;
        if (i + 1 < degree) {
            companion(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = 1.0;
        }
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(companion, false);
    if (eig.info() != Eigen::Success) {
        throw degeneracy_error("polynomial_roots: eigen solver failed");
    }
    const auto& ev = eig.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

std::vector<double> delays_from_poles(const std::vector<complexd>& poles, double window) {
    if (window <= 0.0) throw std::invalid_argument("delays_from_poles: window must be > 0");
    std::vector<double> delays;
    delays.reserve(poles.size());
    for (const complexd& u : poles) {
        double tau = -window * std::arg(u) / (2.0 * pi);
        if (tau < 0.0) tau += window;
        if (tau >= window) tau -= window;
        delays.push_back(tau);
    }
    std::sort(delays.begin(), delays.end());
    return delays;
}

DelayEstimates delays_from_filter(const std::vector<complexd>& filter, double window) {
    if (filter.size() < 2) throw std::invalid_argument("delays_from_filter: filter too short");
    if (std::abs(filter.front()) == 0.0) {
        throw std::invalid_argument("delays_from_filter: leading coefficient must be nonzero");
    }
    if (window <= 0.0) throw std::invalid_argument("delays_from_filter: window must be > 0");

    // f_hat(z) = sum_l f[l] z^-l; roots of sum_l f[l] u^{K-l}.
    const std::size_t k = filter.size() - 1;
    std::vector<complexd> poly(filter.size());
    for (std::size_t l = 0; l <= k; ++l) poly[k - l] = filter[l];

    DelayEstimates out;
    out.roots = polynomial_roots(poly);
    out.delays = delays_from_poles(out.roots, window);

    // Distinct-delay contract: flag clustered roots.
    std::vector<double> args;
    for (const complexd& u : out.roots) args.push_back(std::arg(u));
    std::sort(args.begin(), args.end());
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i + 1] - args[i] < 1e-6) out.degenerate = true;
    }
    if (args.size() >= 2 && (2.0 * pi - (args.back() - args.front())) < 1e-6) {
        out.degenerate = true;
    }
    return out;
}

AmplitudeFit amplitudes_ls(const SpectralSamples& s, const std::vector<double>& delays) {
    const int k = static_cast<int>(delays.size());
    AmplitudeFit out;
    if (k == 0) return out;
    if (s.count() < k) {
        throw std::invalid_argument("amplitudes_ls: need at least as many samples as delays");
    }

    Eigen::MatrixXcd vand(s.count(), k);
    Eigen::VectorXcd rhs(s.count());
    for (int r = 0; r < s.count(); ++r) {
        rhs(r) = s.values[static_cast<std::size_t>(r)];
        const double l = static_cast<double>(s.indices[static_cast<std::size_t>(r)]);
        for (int c = 0; c < k; ++c) {
            vand(r, c) = std::polar(1.0, -2.0 * pi * l * delays[static_cast<std::size_t>(c)] /
                                             s.window);
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(vand, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    out.condition = sv(sv.size() - 1) > 0.0
                        ? sv(0) / sv(sv.size() - 1)
                        : std::numeric_limits<double>::infinity();
    out.ill_conditioned = !(out.condition < 1e8);

    const Eigen::VectorXcd sol = svd.solve(rhs);
    double re_peak = 0.0;
    double im_peak = 0.0;
    for (int c = 0; c < k; ++c) {
        re_peak = std::max(re_peak, std::abs(sol(c).real()));
        im_peak = std::max(im_peak, std::abs(sol(c).imag()));
    }
    out.imag_residual = re_peak > 0.0 ? im_peak / re_peak : im_peak;
    for (int c = 0; c < k; ++c) out.amplitudes.push_back(sol(c).real());
    return out;
}

std::vector<complexd> matrix_pencil(const SpectralSamples& s, int model_order) {
    const int k = model_order;
    if (k < 1) throw std::invalid_argument("matrix_pencil: model order must be >= 1");
    if (!s.consecutive()) throw std::invalid_argument("matrix_pencil: samples must be consecutive");
    const int n = s.count();
    if (n < 2 * k + 1) {
        throw std::invalid_argument("matrix_pencil: need at least 2K+1 consecutive samples");
    }

    const int pencil = (n + 1) / 2;  // ceil(n/2)
    const int rows = n - pencil;
    Eigen::MatrixXcd y0(rows, pencil);
    Eigen::MatrixXcd y1(rows, pencil);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < pencil; ++j) {
            y0(i, j) = s.values[static_cast<std::size_t>(i + j)];
            y1(i, j) = s.values[static_cast<std::size_t>(i + j + 1)];
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(y0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(k - 1) <= 1e-14 * sv(0)) {
        throw degeneracy_error("matrix_pencil: signal subspace collapsed below model order");
    }
    const Eigen::MatrixXcd u_k = svd.matrixU().leftCols(k);
    const Eigen::MatrixXcd v_k = svd.matrixV().leftCols(k);
    const Eigen::VectorXd s_k = sv.head(k);

    Eigen::MatrixXcd a = u_k.adjoint() * y1 * v_k;
    for (int c = 0; c < k; ++c) a.row(c) /= s_k(c);

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(a, false);
    if (eig.info() != Eigen::Success) {
        throw degeneracy_error("matrix_pencil: eigen solver failed");
    }
    const auto& ev = eig.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

}  // namespace usres
