#include "usres/itersis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "usres/errors.hpp"
#include "usres/rng.hpp"

namespace usres {

using std::numbers::pi;
using complexd = std::complex<double>;

namespace {

complexd horner(const std::vector<complexd>& coeffs, complexd z) {
    complexd acc{0.0, 0.0};
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * z + coeffs[i];
    return acc;
}

double coeff_norm(const std::vector<complexd>& coeffs) {
    double acc = 0.0;
    for (const complexd& c : coeffs) acc += std::norm(c);
    return std::sqrt(acc);
}

}  // namespace

void ItersisConfig::validate() const {
    if (outer_max < 1 || inner_max < 1 || init_count < 1) {
        throw std::invalid_argument("ItersisConfig: iteration counts must be >= 1");
    }
    if (sigma_stop <= 0.0) throw std::invalid_argument("ItersisConfig: sigma_stop must be > 0");
    if (order < 1) throw std::invalid_argument("ItersisConfig: order (K) must be >= 1");
    if (fold_count < 0) throw std::invalid_argument("ItersisConfig: fold_count (M) must be >= 0");
    if (spectral_count < 0) throw std::invalid_argument("ItersisConfig: spectral_count must be >= 0");
}

double ItersisConfig::default_sigma(double lambda, int bits) {
    if (lambda <= 0.0) throw std::invalid_argument("default_sigma: lambda must be > 0");
    if (bits >= 1) return 2.0 * lambda / static_cast<double>(1 << bits);
    return 2.0 * lambda * 0x1.0p-40;  // unquantized: effectively exact agreement
}

std::vector<complexd> rational_eval(const RationalFraction& frac, int node_count) {
    if (node_count < 1) throw std::invalid_argument("rational_eval: node_count must be >= 1");
    if (frac.denominator.empty()) throw std::invalid_argument("rational_eval: empty denominator");
    const double qscale = coeff_norm(frac.denominator);
    if (qscale == 0.0) throw std::invalid_argument("rational_eval: zero denominator");

    std::vector<complexd> out(static_cast<std::size_t>(node_count));
    for (int n = 0; n < node_count; ++n) {
        const complexd z = std::polar(1.0, 2.0 * pi * n / node_count);
        const complexd qz = horner(frac.denominator, z);
        if (std::abs(qz) < 1e-12 * qscale) {
            throw degeneracy_error("rational_eval: pole on evaluation node " + std::to_string(n));
        }
        out[static_cast<std::size_t>(n)] =
            frac.numerator.empty() ? complexd{0.0, 0.0} : horner(frac.numerator, z) / qz;
    }
    return out;
}

ResidueModel residue_parameters(const RationalFraction& frac, double lambda, int node_count) {
    if (lambda <= 0.0) throw std::invalid_argument("residue_parameters: lambda must be > 0");
    if (node_count < 1) throw std::invalid_argument("residue_parameters: node_count must be >= 1");
    ResidueModel model;
    if (frac.numerator.empty() || coeff_norm(frac.numerator) == 0.0) return model;

    const std::vector<complexd> roots = polynomial_roots(frac.denominator);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            if (std::abs(roots[i] - roots[j]) < 1e-9 * (1.0 + std::abs(roots[i]))) {
                throw degeneracy_error("residue_parameters: repeated denominator roots");
            }
        }
    }

    std::vector<complexd> q_deriv(frac.denominator.size() > 1 ? frac.denominator.size() - 1 : 1);
    if (frac.denominator.size() > 1) {
        for (std::size_t k = 0; k + 1 < frac.denominator.size(); ++k) {
            q_deriv[k] = static_cast<double>(k + 1) * frac.denominator[k + 1];
        }
    } else {
        q_deriv[0] = complexd{0.0, 0.0};
    }

    const double nn = static_cast<double>(node_count);
    std::vector<std::pair<int, double>> spikes;
    for (const complexd& u : roots) {
        const complexd qp = horner(q_deriv, u);
        const complexd pu = horner(frac.numerator, u);
        const complexd denom = (1.0 - std::pow(u, -node_count)) * qp;
        if (std::abs(denom) < 1e-15 * (1.0 + std::abs(qp))) continue;  // residue unresolvable
        const complexd c = -nn * pu / (u * denom);
        const double cq = residue_quantize(c.real(), lambda);
        if (cq == 0.0) continue;  // fold quantizes away
        double pos = nn * std::arg(u) / (2.0 * pi);
        pos = std::fmod(pos + nn, nn);
        const int n_m = static_cast<int>(std::lround(pos)) % node_count;
        spikes.emplace_back(n_m, cq);
    }

    std::sort(spikes.begin(), spikes.end());
    for (const auto& [pos, amp] : spikes) {
        if (!model.positions.empty() && model.positions.back() == pos) {
            model.amplitudes.back() += amp;  // merged spikes stay on the 2*lambda grid
            if (model.amplitudes.back() == 0.0) {
                model.amplitudes.pop_back();
                model.positions.pop_back();
            }
        } else {
            model.positions.push_back(pos);
            model.amplitudes.push_back(amp);
        }
    }
    return model;
}

RationalFraction iteration_step(const std::vector<double>& target,
                                const std::vector<complexd>& q_prev,
                                const std::vector<complexd>& q_seed, int fold_count) {
    const int m = fold_count;
    const int nn = static_cast<int>(target.size());
    if (m < 1) throw std::invalid_argument("iteration_step: fold_count must be >= 1");
    if (static_cast<int>(q_prev.size()) != m + 1 || static_cast<int>(q_seed.size()) != m + 1) {
        throw std::invalid_argument("iteration_step: q coefficient count must be fold_count + 1");
    }
    if (nn < 2 * m + 2) {
        throw std::invalid_argument("iteration_step: too few nodes for the fold order");
    }

    // Node weights 1/|Q_prev(z_n)|^2; a pole of Q_prev sitting on a node
    // makes the weighted system meaningless.
    const double qscale = coeff_norm(q_prev);
    std::vector<double> w_b(static_cast<std::size_t>(nn));
    for (int n = 0; n < nn; ++n) {
        const complexd qz = horner(q_prev, std::polar(1.0, 2.0 * pi * n / nn));
        const double a = std::abs(qz);
        if (a < 1e-12 * qscale) {
            throw degeneracy_error("iteration_step: previous denominator vanishes on a node");
        }
        w_b[static_cast<std::size_t>(n)] = 1.0 / (a * a);
    }

    // The normal matrix has Toeplitz blocks: every entry is a correlation
    // t[d] = sum_n w[n] e^{j 2 pi n d / nn} of one of three real weights.
    const int cols = 2 * m + 1;
    std::vector<complexd> t_a(static_cast<std::size_t>(m + 1));
    std::vector<complexd> t_ab(static_cast<std::size_t>(m + 1));
    std::vector<complexd> t_b(static_cast<std::size_t>(m + 1));
    for (int d = 0; d <= m; ++d) {
        const complexd step = std::polar(1.0, 2.0 * pi * d / nn);
        complexd rot{1.0, 0.0};
        complexd sa{0.0, 0.0}, sab{0.0, 0.0}, sb{0.0, 0.0};
        for (int n = 0; n < nn; ++n) {
            const double wb = w_b[static_cast<std::size_t>(n)];
            const double e = target[static_cast<std::size_t>(n)];
            sb += wb * rot;
            sab += (e * wb) * rot;
            sa += (e * e * wb) * rot;
            rot *= step;
        }
        t_a[static_cast<std::size_t>(d)] = sa;
        t_ab[static_cast<std::size_t>(d)] = sab;
        t_b[static_cast<std::size_t>(d)] = sb;
    }
    const auto lag = [](const std::vector<complexd>& t, int d) {
        return d >= 0 ? t[static_cast<std::size_t>(d)] : std::conj(t[static_cast<std::size_t>(-d)]);
    };

    Eigen::MatrixXcd normal(cols, cols);
    for (int r = 0; r <= m; ++r) {
        for (int c = 0; c <= m; ++c) normal(r, c) = lag(t_a, c - r);
        for (int c = 0; c < m; ++c) normal(r, m + 1 + c) = -lag(t_ab, c - r);
    }
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c <= m; ++c) normal(m + 1 + r, c) = -lag(t_ab, c - r);
        for (int c = 0; c < m; ++c) normal(m + 1 + r, m + 1 + c) = lag(t_b, c - r);
    }
    const double ridge = 1e-12 * normal.real().trace() / static_cast<double>(cols);
    normal.diagonal().array() += ridge;

    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(cols);
    for (int i = 0; i <= m; ++i) b(i) = q_seed[static_cast<std::size_t>(i)];

    const Eigen::LDLT<Eigen::MatrixXcd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) {
        throw degeneracy_error("iteration_step: normal matrix factorization failed");
    }
    const Eigen::VectorXcd x = ldlt.solve(b);
    const complexd scale = b.dot(x);  // b^H x
    if (!(std::abs(scale) > 1e-300)) {
        throw degeneracy_error("iteration_step: normalization constraint is unreachable");
    }

    RationalFraction out;
    out.denominator.resize(static_cast<std::size_t>(m + 1));
    out.numerator.resize(static_cast<std::size_t>(m));
    for (int i = 0; i <= m; ++i) out.denominator[static_cast<std::size_t>(i)] = x(i) / scale;
    for (int i = 0; i < m; ++i) out.numerator[static_cast<std::size_t>(i)] = x(m + 1 + i) / scale;
    return out;
}

DcEstimate estimate_dc(const SpectralSamples& s_tilde, int order) {
    if (order < 1) throw std::invalid_argument("estimate_dc: order must be >= 1");
    // Collect the consecutive run 0..m (negative indices, if present, are
    // redundant conjugates for real signals).
    std::vector<complexd> v;
    int expect = 0;
    for (std::size_t i = 0; i < s_tilde.indices.size(); ++i) {
        if (s_tilde.indices[i] < 0) continue;
        if (s_tilde.indices[i] != expect) {
            throw std::invalid_argument("estimate_dc: need consecutive indices starting at 0");
        }
        v.push_back(s_tilde.values[i]);
        ++expect;
    }
    const int m = static_cast<int>(v.size()) - 1;
    if (m < order) {
        throw std::invalid_argument("estimate_dc: Toeplitz needs at least K+1 rows");
    }

    Eigen::MatrixXcd toeplitz(m + 1, m + 1);
    for (int r = 0; r <= m; ++r) {
        for (int c = 0; c <= m; ++c) {
            if (r == c) {
                toeplitz(r, c) = v[0].real();  // Hermitian diagonal
            } else if (r > c) {
                toeplitz(r, c) = v[static_cast<std::size_t>(r - c)];
            } else {
                toeplitz(r, c) = std::conj(v[static_cast<std::size_t>(c - r)]);
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(toeplitz);
    if (eig.info() != Eigen::Success) throw degeneracy_error("estimate_dc: eigen solver failed");
    const Eigen::VectorXd evs = eig.eigenvalues();

    int best = 0;
    for (int i = 1; i < evs.size(); ++i) {
        if (std::abs(evs(i)) < std::abs(evs(best))) best = i;
    }
    DcEstimate out;
    out.value = evs(best);
    const double scale = std::max(std::abs(evs(0)), std::abs(evs(evs.size() - 1)));
    for (int i = 0; i < evs.size(); ++i) {
        if (i == best) continue;
        const bool opposite = (evs(i) < 0.0) != (evs(best) < 0.0);
        if (opposite && std::abs(std::abs(evs(i)) - std::abs(evs(best))) <= 1e-9 * std::max(scale, 1.0)) {
            out.sign_ambiguous = true;
        }
    }
    return out;
}

SpikeTrain solve_p2(const std::vector<double>& unfolded, const KernelModel& kernel, double step,
                    int order, int spectral_count) {
    if (order < 1) throw std::invalid_argument("solve_p2: order must be >= 1");
    if (step <= 0.0) throw std::invalid_argument("solve_p2: step must be > 0");
    const int n = static_cast<int>(unfolded.size()) + 1;

    int spectral = spectral_count > 0 ? spectral_count : 2 * order + 8;
    spectral = std::min(spectral, (n - 1) / 2);
    if (spectral < 2 * order + 1) {
        throw std::invalid_argument("solve_p2: too few spectral bins for the matrix pencil");
    }

    SampledSignal integrated;
    integrated.values = anti_difference(unfolded, 0.0);
    integrated.step = step;

    const std::vector<complexd> kernel_dft =
        periodized_kernel_dft(kernel, step, n, 0, spectral);
    const SpectralSamples sos = sos_from_samples(integrated, kernel_dft, spectral);

    // Initial DC estimate: fit poles on the known bins, extrapolate to l = 0.
    const std::vector<complexd> poles0 = matrix_pencil(sos, order);
    const std::vector<double> delays0 = delays_from_poles(poles0, sos.window);
    const AmplitudeFit fit0 = amplitudes_ls(conj_extend(sos), delays0);
    double dc = 0.0;
    for (double a : fit0.amplitudes) dc += a;

    // Refine: the leftover constant is the small-magnitude eigenvalue of
    // the spectrum's Toeplitz matrix.
    SpectralSamples with_dc;
    with_dc.window = sos.window;
    with_dc.indices.push_back(0);
    with_dc.values.push_back(complexd{dc, 0.0});
    for (int i = 0; i < sos.count(); ++i) {
        with_dc.indices.push_back(sos.indices[static_cast<std::size_t>(i)]);
        with_dc.values.push_back(sos.values[static_cast<std::size_t>(i)]);
    }
    const DcEstimate offset = estimate_dc(with_dc, order);
    with_dc.values[0] = complexd{dc - offset.value, 0.0};

    const SpectralSamples full = conj_extend(with_dc);
    const std::vector<complexd> poles = matrix_pencil(full, order);
    SpikeTrain out;
    out.delays = delays_from_poles(poles, full.window);
    out.amplitudes = amplitudes_ls(full, out.delays).amplitudes;
    return out;
}

ItersisResult itersis_recover(const FoldedSignal& y, const KernelModel& kernel,
                              const ItersisConfig& cfg) {
    cfg.validate();
    kernel.validate();
    const int n = y.count();
    if (n < 4) throw std::invalid_argument("itersis_recover: too few samples");
    const int nn = n - 1;  // first-difference length, also the node count
    const std::vector<double> y_bar = finite_difference(y.values, 1);

    ItersisResult result;

    if (cfg.fold_count == 0) {
        // In-range signal: no residue to recover.
        result.spikes = solve_p2(y_bar, kernel, y.step, cfg.order, cfg.spectral_count);
        result.fraction.denominator = {complexd{1.0, 0.0}};
        result.converged = true;
        return result;
    }

    const int m = cfg.fold_count;
    // Residue target under a zero initial signal estimate:
    // eps = Delta g_hat - y_bar with g_hat = 0.
    std::vector<double> target(y_bar.size());
    for (std::size_t i = 0; i < y_bar.size(); ++i) target[i] = -y_bar[i];

    std::vector<double> prev_dg;
    std::vector<double> best_recon;
    RationalFraction best_fraction;
    SpikeTrain best_spikes;
    double best_mse = std::numeric_limits<double>::infinity();
    bool have_iterate = false;

    for (int outer = 1; outer <= cfg.outer_max; ++outer) {
        double selected_mse = std::numeric_limits<double>::infinity();
        RationalFraction selected;
        std::vector<double> selected_recon;
        std::vector<double> scan_mse;

        for (int init = 0; init < cfg.init_count; ++init) {
            // Unit-normalized complex Gaussian denominator seed.
            CounterRng rng(CounterRng::derive_key(
                {cfg.seed, 0x7131u, static_cast<std::uint64_t>(outer),
                 static_cast<std::uint64_t>(init)}));
            std::vector<complexd> q_seed(static_cast<std::size_t>(m + 1));
            for (auto& c : q_seed) c = complexd{rng.normal(), rng.normal()};
            const double norm = coeff_norm(q_seed);
            for (auto& c : q_seed) c /= norm;

            std::vector<complexd> q = q_seed;
            for (int j = 1; j <= cfg.inner_max; ++j) {
                RationalFraction frac;
                std::vector<complexd> values;
                try {
                    frac = iteration_step(target, q, q_seed, m);
                    values = rational_eval(frac, nn);
                } catch (const degeneracy_error&) {
                    break;  // abandon this initialization, keep the others
                }
                std::vector<double> recon(static_cast<std::size_t>(nn));
                double mse = 0.0;
                for (int i = 0; i < nn; ++i) {
                    recon[static_cast<std::size_t>(i)] =
                        residue_quantize(values[static_cast<std::size_t>(i)].real(), y.lambda);
                    const double d = target[static_cast<std::size_t>(i)] -
                                     recon[static_cast<std::size_t>(i)];
                    mse += d * d;
                }
                mse /= static_cast<double>(nn);
                scan_mse.push_back(mse);
                if (mse < selected_mse) {
                    selected_mse = mse;
                    selected = frac;
                    selected_recon = recon;
                }
                q = frac.denominator;
            }
        }
        result.candidate_mse.push_back(scan_mse);
        if (selected_recon.empty()) {
            throw degeneracy_error("itersis_recover: every initialization degenerated");
        }

        // P2 on the residue-compensated difference signal.
        std::vector<double> unfolded(y_bar.size());
        for (std::size_t i = 0; i < y_bar.size(); ++i) unfolded[i] = selected_recon[i] + y_bar[i];
        const SpikeTrain spikes = solve_p2(unfolded, kernel, y.step, cfg.order, cfg.spectral_count);
        const SampledSignal rendered = render(spikes, kernel, y.step, n);
        const std::vector<double> dg = finite_difference(rendered.values, 1);

        double stop_norm = std::numeric_limits<double>::quiet_NaN();
        if (!prev_dg.empty()) {
            stop_norm = 0.0;
            for (std::size_t i = 0; i < dg.size(); ++i) {
                stop_norm = std::max(stop_norm, std::abs(dg[i] - prev_dg[i]));
            }
        }
        result.trace.push_back({outer, selected_mse, stop_norm});

        if (selected_mse < best_mse) {
            best_mse = selected_mse;
            best_fraction = selected;
            best_spikes = spikes;
            have_iterate = true;
        }

        if (!prev_dg.empty() && stop_norm <= cfg.sigma_stop) {
            result.spikes = spikes;
            result.fraction = selected;
            result.residue = residue_parameters(selected, y.lambda, nn);
            result.converged = true;
            return result;
        }

        prev_dg = dg;
        for (std::size_t i = 0; i < y_bar.size(); ++i) target[i] = dg[i] - y_bar[i];
    }

    if (!have_iterate) throw degeneracy_error("itersis_recover: no usable iterate");
    result.spikes = best_spikes;
    result.fraction = best_fraction;
    result.residue = residue_parameters(best_fraction, y.lambda, nn);
    result.converged = false;
    return result;
}

}  // namespace usres
