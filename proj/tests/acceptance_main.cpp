// Acceptance suite: end-to-end checks of the library's guarantees, one
// line of output per criterion. Exit code = number of failed criteria.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "usres/bench.hpp"
#include "usres/errors.hpp"
#include "usres/io.hpp"
#include "usres/itersis.hpp"
#include "usres/kernels.hpp"
#include "usres/modulo.hpp"
#include "usres/rng.hpp"
#include "usres/spectral.hpp"
#include "usres/theorem1.hpp"
#include "test_support.hpp"

using namespace usres;
using namespace usres::testing;
using std::numbers::pi;
using complexd = std::complex<double>;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// Shared state: criterion 3 computes the curve report, criterion 4 reads it.
ExperimentReport g_curve_report;
bool g_curve_done = false;

CurveConfig acceptance_curve_config() {
    CurveConfig cfg;  // defaults pin the two-spike, ratio-10, 75-step scene
    cfg.trials = 200;
    cfg.seed = 20240901;
    cfg.threads = 1;
    cfg.knobs.init_count = 4;
    cfg.knobs.inner_max = 8;
    cfg.knobs.outer_max = 6;
    return cfg;
}

Outcome criterion1_exact_recovery() {
    Outcome out;
    double worst_delay = 0.0;
    double worst_amp = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        CounterRng pick(CounterRng::derive_key({101, seed}));
        const int order = 2 + static_cast<int>(pick.uniform(0.0, 1.999));
        const int spikes = 1 + static_cast<int>(pick.uniform(0.0, 2.999));
        const int target_n = order == 2 ? 9000 : 4000;
        const ExactInstance inst = make_exact_instance(seed, order, spikes, target_n, 0.5);

        SpikeTrain rec;
        try {
            rec = recover_exact(inst.y, inst.kernel, inst.params);
        } catch (const std::exception& e) {
            out.detail = fmt("seed %llu raised: %s", (unsigned long long)seed, e.what());
            return out;
        }
        if (rec.count() != spikes) {
            out.detail = fmt("seed %llu: wrong spike count", (unsigned long long)seed);
            return out;
        }
        for (int k = 0; k < spikes; ++k) {
            worst_delay = std::max(worst_delay,
                                   std::abs(rec.delays[k] - inst.spikes.delays[k]) /
                                       inst.params.window);
            worst_amp = std::max(worst_amp,
                                 std::abs(rec.amplitudes[k] - inst.spikes.amplitudes[k]) /
                                     std::abs(inst.spikes.amplitudes[k]));
        }
    }
    out.pass = worst_delay <= 1e-6 && worst_amp <= 1e-6;
    out.detail = fmt("max delay err %.2e*tau, max amp err %.2e rel", worst_delay, worst_amp);
    return out;
}

Outcome criterion2_filtering_identity() {
    Outcome out;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        CounterRng pick(CounterRng::derive_key({102, seed}));
        const int order = 2 + static_cast<int>(pick.uniform(0.0, 1.999));
        const int spikes = 1 + static_cast<int>(pick.uniform(0.0, 2.999));
        const double frac = pick.uniform(0.25, 0.95);
        const ExactInstance inst = make_exact_instance(seed + 5000, order, spikes, 400, frac);

        const std::vector<double> lhs =
            unfold_by_differences(inst.y, inst.params.diff_order, inst.params.lambda);
        const std::vector<double> rhs =
            finite_difference(inst.g.values, inst.params.diff_order);
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
        }
    }
    out.pass = worst <= 1e-9;
    out.detail = fmt("max elementwise gap %.2e over 1000 instances", worst);
    return out;
}

Outcome criterion3_curve_gain() {
    Outcome out;
    g_curve_report = run_curve(acceptance_curve_config());
    g_curve_done = true;
    double min_gain = 1e300;
    std::string weakest;
    for (const CurveCell& cell : g_curve_report.curve_cells) {
        if (!cell.valid) {
            out.detail = fmt("cell bits=%d dr=%g had no successful trials", cell.bits,
                             cell.dr_multiple);
            return out;
        }
        if (cell.gain_db < min_gain) {
            min_gain = cell.gain_db;
            weakest = fmt("bits=%d dr=%g", cell.bits, cell.dr_multiple);
        }
    }
    out.pass = min_gain >= 20.0;
    out.detail = fmt("min median gain %.1f dB at %s (threshold 20 dB)", min_gain,
                     weakest.c_str());
    return out;
}

Outcome criterion4_dr_robustness() {
    Outcome out;
    if (!g_curve_done) {
        g_curve_report = run_curve(acceptance_curve_config());
        g_curve_done = true;
    }
    double worst_spread = 0.0;
    for (int bits : {6, 9}) {
        double lo = 1e300;
        double hi = -1e300;
        for (const CurveCell& cell : g_curve_report.curve_cells) {
            if (cell.bits != bits || !cell.valid) continue;
            lo = std::min(lo, cell.usf_mse_db_median);
            hi = std::max(hi, cell.usf_mse_db_median);
        }
        worst_spread = std::max(worst_spread, hi - lo);
    }
    out.pass = worst_spread <= 5.0;
    out.detail = fmt("max spread of median MSE across DR %.2f dB (threshold 5 dB)", worst_spread);
    return out;
}

Outcome criterion5_lemma_bound() {
    Outcome out;
    const double window = 10.0;
    double worst_margin = 1e300;
    for (int order : {1, 2, 3}) {
        for (int max_index : {4, 8, 16}) {
            for (double gamma : {0.5, 1.0}) {
                KernelModel k{{1.0}, gamma, order};
                const FourierCoeffs fc = kernel_fourier_coeffs(k, window, max_index);
                const double bound = approximation_error_bound(k, window, max_index);
                const double shift = -k.support().lo;
                const int grid = 4000;
                double mse = 0.0;
                for (int i = 0; i < grid; ++i) {
                    const double u = window * (i + 0.5) / grid;
                    complexd rec{0.0, 0.0};
                    for (int m = -max_index; m <= max_index; ++m) {
                        rec += fc.at(m) * std::polar(1.0, 2.0 * pi * m * u / window);
                    }
                    mse += std::norm(kernel_eval(k, u - shift) - rec);
                }
                mse /= grid;
                if (mse > bound) {
                    out.detail = fmt("violated at L=%d I=%d gamma=%g (mse %.3e > bound %.3e)",
                                     order, max_index, gamma, mse, bound);
                    return out;
                }
                worst_margin = std::min(worst_margin, bound / std::max(mse, 1e-300));
            }
        }
    }
    out.pass = true;
    out.detail = fmt("bound holds on all 18 cells (tightest bound/mse ratio %.1f)", worst_margin);
    return out;
}

Outcome criterion6_derivative_bound() {
    Outcome out;
    double worst_ratio = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        CounterRng rng(CounterRng::derive_key({106, seed}));
        const int order = 2 + static_cast<int>(rng.uniform(0.0, 2.999));
        const KernelModel k = random_kernel(rng, order, 3, true);
        const Interval s = k.support();
        for (int h = 0; h + 1 <= order; ++h) {
            const double bound = derivative_sup_bound(k, h);
            const double fd_step = k.gamma / 1e4;
            const int grid = static_cast<int>(s.width() / (k.gamma / 1000.0));
            double sup = 0.0;
            for (int i = 0; i <= grid; ++i) {
                const double t = s.lo + s.width() * i / grid;
                double sum = 0.0;
                double binom = 1.0;
                for (int j = 0; j <= h; ++j) {
                    const double sign = (j % 2 == 0) ? 1.0 : -1.0;
                    sum += sign * binom * kernel_eval(k, t + (h / 2.0 - j) * fd_step);
                    binom = binom * (h - j) / (j + 1);
                }
                sup = std::max(sup, std::abs(sum / std::pow(fd_step, h)));
            }
            worst_ratio = std::max(worst_ratio, sup / bound);
        }
    }
    out.pass = worst_ratio <= 1.01;
    out.detail = fmt("max derivative-sup / bound ratio %.4f (allowed 1.01)", worst_ratio);
    return out;
}

Outcome criterion7_residue_exactness() {
    Outcome out;
    int matches = 0;
    int total = 0;
    std::string mismatch_seeds;
    for (std::uint64_t seed = 0; total < 500; ++seed) {
        CounterRng pick(CounterRng::derive_key({107, seed}));
        const double dr = pick.uniform(1.8, 3.2);
        const FoldedInstance inst = make_folded_instance(seed, 2, 2, dr, 0, 0.0, 700);
        if (inst.truth_residue.count() < 1 || inst.truth_residue.count() > 10) continue;
        ++total;
        bool same = false;
        try {
            const ItersisResult res = itersis_recover(inst.y, inst.kernel, inst.cfg);
            same = res.residue.count() == inst.truth_residue.count();
            for (int i = 0; same && i < res.residue.count(); ++i) {
                same = res.residue.positions[i] == inst.truth_residue.positions[i] &&
                       std::abs(res.residue.amplitudes[i] -
                                inst.truth_residue.amplitudes[i]) <= 1e-9;
            }
        } catch (const degeneracy_error&) {
            same = false;
        }
        if (same) {
            ++matches;
        } else if (mismatch_seeds.size() < 120) {
            mismatch_seeds += fmt(" %llu", (unsigned long long)seed);
        }
    }
    const double rate = static_cast<double>(matches) / total;
    out.pass = rate >= 0.95;
    out.detail = fmt("%d/%d residues exact (%.1f%%, need 95%%)%s%s", matches, total,
                     100.0 * rate, mismatch_seeds.empty() ? "" : "; mismatch seeds:",
                     mismatch_seeds.c_str());
    return out;
}

Outcome criterion8_oracle_equivalence() {
    Outcome out;

    // Matrix pencil vs annihilating filter on synthetic noiseless spectra.
    double worst_pole_gap = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        CounterRng rng(CounterRng::derive_key({108, seed}));
        const int k = 1 + static_cast<int>(rng.uniform(0.0, 2.999));
        const double window = 1.0;
        const std::vector<double> delays = random_delays(rng, k, 0.05, 0.95, 0.07);
        std::vector<double> amps;
        for (int i = 0; i < k; ++i) amps.push_back(rng.uniform(0.5, 2.0));

        SpectralSamples s;
        s.window = window;
        for (int l = 1; l <= 2 * k + 5; ++l) {
            complexd acc{0.0, 0.0};
            for (int i = 0; i < k; ++i) {
                acc += amps[i] * std::polar(1.0, -2.0 * pi * l * delays[i] / window);
            }
            s.indices.push_back(l);
            s.values.push_back(acc);
        }
        const AnnihilatingFilter f = annihilating_filter(s, k);
        const DelayEstimates prony = delays_from_filter(f.coeffs, window);
        const std::vector<double> pencil = delays_from_poles(matrix_pencil(s, k), window);
        for (int i = 0; i < k; ++i) {
            worst_pole_gap = std::max(worst_pole_gap, std::abs(prony.delays[i] - pencil[i]));
        }
    }
    if (worst_pole_gap > 1e-8) {
        out.detail = fmt("pencil/prony delay gap %.2e exceeds 1e-8", worst_pole_gap);
        return out;
    }

    // Full robust pipeline vs exact pipeline on ideally folded data.
    double worst_rel = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const FoldedInstance inst = make_folded_instance(seed + 900, 2, 2, 4.0, 0, 0.0, 1500);
        Theorem1Params p;
        p.spike_count = 2;
        p.kernel_order = 2;
        p.diff_order = 1;
        p.gamma = inst.kernel.gamma;
        p.lambda = inst.y.lambda;
        p.tv_norm = inst.spikes.tv_norm();
        p.kernel_sup = kernel_sup_norm(inst.kernel);
        p.window = inst.y.window();
        if (inst.y.step > max_sampling_step(p)) {
            out.detail = fmt("instance %llu violates the sampling bound",
                             (unsigned long long)(seed + 900));
            return out;
        }
        try {
            const SpikeTrain exact = recover_exact(inst.y, inst.kernel, p);
            const ItersisResult robust = itersis_recover(inst.y, inst.kernel, inst.cfg);
            if (exact.count() != 2 || robust.spikes.count() != 2) {
                out.detail = fmt("instance %llu: wrong spike count", (unsigned long long)seed);
                return out;
            }
            for (int k = 0; k < 2; ++k) {
                worst_rel = std::max(worst_rel,
                                     std::abs(robust.spikes.delays[k] - exact.delays[k]) /
                                         p.window);
                worst_rel = std::max(worst_rel,
                                     std::abs(robust.spikes.amplitudes[k] - exact.amplitudes[k]) /
                                         std::abs(exact.amplitudes[k]));
            }
        } catch (const std::exception& e) {
            out.detail = fmt("instance %llu raised: %s", (unsigned long long)seed, e.what());
            return out;
        }
    }
    out.pass = worst_rel <= 1e-6;
    out.detail = fmt("pole sets agree to %.1e; robust-vs-exact max rel err %.2e", worst_pole_gap,
                     worst_rel);
    return out;
}

Outcome criterion9_determinism() {
    Outcome out;
    setenv("SOURCE_DATE_EPOCH", "1700000000", 1);

    CurveConfig curve;
    curve.bits = {3, 6};
    curve.dr_multiples = {10.0, 20.0};
    curve.trials = 10;
    curve.seed = 42;
    curve.knobs.init_count = 3;
    curve.knobs.inner_max = 6;
    curve.knobs.outer_max = 4;

    curve.threads = 1;
    const std::string a = report_to_json(run_curve(curve)) + report_to_csv(run_curve(curve));
    curve.threads = 3;
    const std::string b = report_to_json(run_curve(curve)) + report_to_csv(run_curve(curve));

    SeparationConfig sep;
    sep.trials = 6;
    sep.seed = 43;
    sep.knobs.init_count = 3;
    sep.knobs.inner_max = 6;
    sep.knobs.outer_max = 4;
    sep.threads = 1;
    const std::string c = report_to_json(run_separation_sweep(sep));
    sep.threads = 2;
    const std::string d = report_to_json(run_separation_sweep(sep));

    ClippingConfig clip;
    clip.seed = 44;
    const std::string e = report_to_json(run_clipping_demo(clip));
    const std::string f = report_to_json(run_clipping_demo(clip));

    unsetenv("SOURCE_DATE_EPOCH");
    out.pass = a == b && c == d && e == f;
    out.detail = out.pass ? "curve, separation and clipping reports byte-identical "
                            "(including a multi-worker pool)"
                          : "report bytes differ between runs";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
    }

    struct Criterion {
        int id;
        const char* name;
        double budget_s;  // 0 = untimed
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "exact recovery (noiseless ideal folding)", 30.0, criterion1_exact_recovery},
        {2, "nonlinear filtering identity", 30.0, criterion2_filtering_identity},
        {3, "bit-budget/DR gain grid", 600.0, criterion3_curve_gain},
        {4, "robustness to input dynamic range", 0.0, criterion4_dr_robustness},
        {5, "truncated-Fourier approximation bound", 60.0, criterion5_lemma_bound},
        {6, "kernel derivative sup bound", 0.0, criterion6_derivative_bound},
        {7, "fold-residue exactness", 0.0, criterion7_residue_exactness},
        {8, "estimator oracle equivalences", 0.0, criterion8_oracle_equivalence},
        {9, "bit-identical reports", 0.0, criterion9_determinism},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        const double elapsed = seconds_since(t0);
        bool in_budget = c.budget_s <= 0.0 || elapsed < c.budget_s;
        const bool pass = outcome.pass && in_budget;
        std::printf("[%s] C%d %s: %s (%.1fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    outcome.detail.c_str(), elapsed,
                    in_budget ? "" : fmt(", over %.0fs budget", c.budget_s).c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    return failures;
}
