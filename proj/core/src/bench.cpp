#include "usres/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "usres/errors.hpp"
#include "usres/io.hpp"
#include "usres/modulo.hpp"
#include "usres/rng.hpp"
#include "usres/spectral.hpp"

namespace usres {

namespace {

constexpr std::uint64_t kSceneStream = 0xA1;
constexpr std::uint64_t kNoiseStream = 0xB2;
constexpr std::uint64_t kSolverStream = 0xC3;

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double mse_db(double mse) { return 10.0 * std::log10(std::max(mse, 1e-300)); }

double max_delay_error(const std::vector<double>& truth, const std::vector<double>& est) {
    if (truth.size() != est.size()) return std::numeric_limits<double>::infinity();
    double err = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
        err = std::max(err, std::abs(truth[k] - est[k]));
    }
    return err;
}

struct SceneBounds {
    double lo = 0.0;
    double hi = 0.0;  ///< valid range for the first delay given the gap
};

SceneBounds delay_bounds(const KernelModel& kernel, double step, int count, double gap) {
    const Interval sup = kernel.support();
    const double window = step * count;
    SceneBounds b;
    b.lo = -sup.lo + step;
    b.hi = window - sup.hi - step - gap;
    if (b.hi <= b.lo) {
        throw std::invalid_argument(
            "scene does not fit: kernel support plus separation exceeds the window");
    }
    return b;
}

/// Two-spike scene with the requested gap, peak-scaled to dr * lambda.
SpikeTrain make_pair_scene(double tau1, double gap, double ratio, double peak,
                           const KernelModel& kernel, double step, int count) {
    SpikeTrain unit;
    unit.amplitudes = {1.0, 1.0 / ratio};
    unit.delays = {tau1, tau1 + gap};
    const SampledSignal g = render(unit, kernel, step, count);
    double gmax = 0.0;
    for (double v : g.values) gmax = std::max(gmax, std::abs(v));
    if (gmax <= 0.0) throw std::invalid_argument("scene renders to zero signal");
    const double scale = peak / gmax;
    unit.amplitudes[0] *= scale;
    unit.amplitudes[1] *= scale;
    return unit;
}

ItersisConfig make_itersis_config(const ItersisKnobs& knobs, double lambda, int bits,
                                  int spectral, int folds, int order, std::uint64_t seed) {
    ItersisConfig cfg;
    cfg.outer_max = knobs.outer_max;
    cfg.inner_max = knobs.inner_max;
    cfg.init_count = knobs.init_count;
    cfg.sigma_stop = knobs.sigma_scale * ItersisConfig::default_sigma(lambda, bits);
    cfg.spectral_count = spectral;
    cfg.fold_count = folds;
    cfg.order = order;
    cfg.seed = seed;
    return cfg;
}

void validate_common(int trials, double lambda, int sample_count, double step,
                     double amplitude_ratio, int order, int spectral_count) {
    if (trials < 1) throw std::invalid_argument("bench config: trials must be >= 1");
    if (lambda <= 0.0) throw std::invalid_argument("bench config: lambda must be > 0");
    if (sample_count < 16) throw std::invalid_argument("bench config: sample_count too small");
    if (step <= 0.0) throw std::invalid_argument("bench config: step must be > 0");
    if (amplitude_ratio < 1.0) throw std::invalid_argument("bench config: amplitude_ratio >= 1");
    if (order < 1) throw std::invalid_argument("bench config: order must be >= 1");
    if (spectral_count < 2 * order + 1) {
        throw std::invalid_argument("bench config: spectral_count must be >= 2*order+1");
    }
}

}  // namespace

KernelModel bench_kernel(double gamma) {
    KernelModel k;
    k.coeffs = {0.18, 0.65, 1.0, 0.52, 0.12};
    k.gamma = gamma;
    k.order = 3;
    return k;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (count <= 0) return;
    const int workers = std::max(1, std::min(threads, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void CurveConfig::validate() const {
    validate_common(trials, lambda, sample_count, step, amplitude_ratio, order, spectral_count);
    if (bits.empty() || dr_multiples.empty()) {
        throw std::invalid_argument("curve config: bits and dr_multiples must be non-empty");
    }
    for (int b : bits) {
        if (b < 1 || b > 24) throw std::invalid_argument("curve config: bits must be in [1, 24]");
    }
    for (double dr : dr_multiples) {
        if (dr <= 0.0) throw std::invalid_argument("curve config: dr multiples must be > 0");
    }
    if (separation_steps <= 0.0) {
        throw std::invalid_argument("curve config: separation_steps must be > 0");
    }
}

ExperimentReport run_curve(const CurveConfig& config) {
    config.validate();
    CurveConfig cfg = config;
    if (cfg.kernel.coeffs.empty()) cfg.kernel = bench_kernel(12.0 * cfg.step);
    cfg.kernel.validate();

    const int n = cfg.sample_count;
    const double gap = cfg.separation_steps * cfg.step;
    const SceneBounds bounds = delay_bounds(cfg.kernel, cfg.step, n, gap);

    struct Trial {
        bool usf_ok = false;
        bool conv_ok = false;
        double usf_db = 0.0;
        double conv_db = 0.0;
        double usf_delay_err = 0.0;
    };

    const int cell_count = static_cast<int>(cfg.bits.size() * cfg.dr_multiples.size());
    const int jobs = cell_count * cfg.trials;
    std::vector<Trial> results(static_cast<std::size_t>(jobs));

    parallel_for(jobs, cfg.threads, [&](int job) {
        const int cell = job / cfg.trials;
        const int trial = job % cfg.trials;
        const int bits = cfg.bits[static_cast<std::size_t>(cell) / cfg.dr_multiples.size()];
        const double dr =
            cfg.dr_multiples[static_cast<std::size_t>(cell) % cfg.dr_multiples.size()];
        Trial& out = results[static_cast<std::size_t>(job)];

        CounterRng rng(CounterRng::derive_key({cfg.seed, kSceneStream,
                                               static_cast<std::uint64_t>(cell),
                                               static_cast<std::uint64_t>(trial)}));
        const double tau1 = rng.uniform(bounds.lo, bounds.hi);
        const SpikeTrain truth = make_pair_scene(tau1, gap, cfg.amplitude_ratio,
                                                 dr * cfg.lambda, cfg.kernel, cfg.step, n);
        const SampledSignal g = synthesize(truth, cfg.kernel, cfg.step, n);
        const int folds =
            residue_spikes(modular_decompose(g.values, cfg.lambda).residue).count();

        AcquisitionConfig acq;
        acq.lambda = cfg.lambda;
        acq.bits = bits;
        acq.noise_sigma = cfg.noise_sigma;
        acq.seed = CounterRng::derive_key({cfg.seed, kNoiseStream,
                                           static_cast<std::uint64_t>(cell),
                                           static_cast<std::uint64_t>(trial)});

        // Folded path.
        try {
            acq.mode = AdcMode::modulo;
            const FoldedSignal y = acquire(g.values, cfg.step, acq);
            const ItersisConfig ic = make_itersis_config(
                cfg.knobs, cfg.lambda, bits, cfg.spectral_count, folds, cfg.order,
                CounterRng::derive_key({cfg.seed, kSolverStream,
                                        static_cast<std::uint64_t>(cell),
                                        static_cast<std::uint64_t>(trial)}));
            const ItersisResult res = itersis_recover(y, cfg.kernel, ic);
            const SampledSignal rec = render(res.spikes, cfg.kernel, cfg.step, n);
            out.usf_db = mse_db(fidelity(g.values, rec.values).mse);
            out.usf_delay_err = max_delay_error(truth.delays, res.spikes.delays);
            out.usf_ok = true;
        } catch (const degeneracy_error&) {
        } catch (const std::invalid_argument&) {
        }

        // Conventional path: clip at the same full scale, equal bit budget.
        try {
            acq.mode = AdcMode::conventional;
            acq.full_scale = cfg.lambda;
            const FoldedSignal y = acquire(g.values, cfg.step, acq);
            const std::vector<double> dy = finite_difference(y.values, 1);
            const SpikeTrain spikes =
                solve_p2(dy, cfg.kernel, cfg.step, cfg.order, cfg.spectral_count);
            const SampledSignal rec = render(spikes, cfg.kernel, cfg.step, n);
            out.conv_db = mse_db(fidelity(g.values, rec.values).mse);
            out.conv_ok = true;
        } catch (const degeneracy_error&) {
        } catch (const std::invalid_argument&) {
        }
    });

    ExperimentReport report;
    report.kind = "curve";
    report.seed = cfg.seed;
    report.trials = cfg.trials;
    report.threads = cfg.threads;
    report.config_digest = fnv1a_hex(curve_config_to_json(cfg));
    report.timestamp_utc = report_timestamp();

    for (int cell = 0; cell < cell_count; ++cell) {
        CurveCell out;
        out.bits = cfg.bits[static_cast<std::size_t>(cell) / cfg.dr_multiples.size()];
        out.dr_multiple =
            cfg.dr_multiples[static_cast<std::size_t>(cell) % cfg.dr_multiples.size()];
        out.trial_count = cfg.trials;

        std::vector<double> usf_dbs, conv_dbs, delay_errs;
        for (int t = 0; t < cfg.trials; ++t) {
            const Trial& r = results[static_cast<std::size_t>(cell * cfg.trials + t)];
            if (r.usf_ok) {
                usf_dbs.push_back(r.usf_db);
                delay_errs.push_back(r.usf_delay_err);
            } else {
                ++out.usf_failures;
            }
            if (r.conv_ok) {
                conv_dbs.push_back(r.conv_db);
            } else {
                ++out.conv_failures;
            }
        }
        out.valid = !usf_dbs.empty() && !conv_dbs.empty();
        if (out.valid) {
            out.usf_mse_db_median = median(usf_dbs);
            out.usf_mse_db_mean = mean(usf_dbs);
            out.conv_mse_db_median = median(conv_dbs);
            out.conv_mse_db_mean = mean(conv_dbs);
            out.gain_db = out.conv_mse_db_median - out.usf_mse_db_median;
            out.usf_delay_err_p10_s = quantile(delay_errs, 0.10);
            out.usf_delay_err_p50_s = quantile(delay_errs, 0.50);
            out.usf_delay_err_p90_s = quantile(delay_errs, 0.90);
        }
        report.curve_cells.push_back(out);
    }
    return report;
}

void SeparationConfig::validate() const {
    validate_common(trials, lambda, sample_count, step, amplitude_ratio, order, spectral_count);
    if (bits < 1 || bits > 24) throw std::invalid_argument("separation config: bits in [1, 24]");
    if (dr_multiple <= 0.0) throw std::invalid_argument("separation config: dr_multiple > 0");
    if (separations_m.empty()) {
        throw std::invalid_argument("separation config: separations_m must be non-empty");
    }
    for (double s : separations_m) {
        if (s <= 0.0) {
            throw std::invalid_argument(
                "separation config: separations must be > 0 (coincident targets are not "
                "recoverable)");
        }
    }
}

ExperimentReport run_separation_sweep(const SeparationConfig& config) {
    config.validate();
    SeparationConfig cfg = config;
    if (cfg.kernel.coeffs.empty()) cfg.kernel = bench_kernel(12.0 * cfg.step);
    cfg.kernel.validate();

    const int n = cfg.sample_count;

    struct Trial {
        bool ok = false;
        double gap_err = 0.0;
    };

    const int cell_count = static_cast<int>(cfg.separations_m.size());
    const int jobs = cell_count * cfg.trials;
    std::vector<Trial> results(static_cast<std::size_t>(jobs));

    parallel_for(jobs, cfg.threads, [&](int job) {
        const int cell = job / cfg.trials;
        const int trial = job % cfg.trials;
        const double gap = 2.0 * cfg.separations_m[static_cast<std::size_t>(cell)] /
                           kSpeedOfLight;
        Trial& out = results[static_cast<std::size_t>(job)];

        const SceneBounds bounds = delay_bounds(cfg.kernel, cfg.step, n, gap);
        CounterRng rng(CounterRng::derive_key({cfg.seed, kSceneStream,
                                               static_cast<std::uint64_t>(cell),
                                               static_cast<std::uint64_t>(trial)}));
        const double tau1 = rng.uniform(bounds.lo, bounds.hi);
        const SpikeTrain truth = make_pair_scene(tau1, gap, cfg.amplitude_ratio,
                                                 cfg.dr_multiple * cfg.lambda, cfg.kernel,
                                                 cfg.step, n);
        const SampledSignal g = synthesize(truth, cfg.kernel, cfg.step, n);
        const int folds =
            residue_spikes(modular_decompose(g.values, cfg.lambda).residue).count();

        AcquisitionConfig acq;
        acq.lambda = cfg.lambda;
        acq.bits = cfg.bits;
        acq.mode = AdcMode::modulo;
        acq.noise_sigma = cfg.noise_sigma;
        acq.seed = CounterRng::derive_key({cfg.seed, kNoiseStream,
                                           static_cast<std::uint64_t>(cell),
                                           static_cast<std::uint64_t>(trial)});
        try {
            const FoldedSignal y = acquire(g.values, cfg.step, acq);
            const ItersisConfig ic = make_itersis_config(
                cfg.knobs, cfg.lambda, cfg.bits, cfg.spectral_count, folds, cfg.order,
                CounterRng::derive_key({cfg.seed, kSolverStream,
                                        static_cast<std::uint64_t>(cell),
                                        static_cast<std::uint64_t>(trial)}));
            const ItersisResult res = itersis_recover(y, cfg.kernel, ic);
            if (res.spikes.count() >= 2) {
                const double est_gap = res.spikes.delays.back() - res.spikes.delays.front();
                out.gap_err = std::abs(est_gap - gap);
                out.ok = true;
            }
        } catch (const degeneracy_error&) {
        } catch (const std::invalid_argument&) {
        }
    });

    ExperimentReport report;
    report.kind = "separation";
    report.seed = cfg.seed;
    report.trials = cfg.trials;
    report.threads = cfg.threads;
    report.config_digest = fnv1a_hex(separation_config_to_json(cfg));
    report.timestamp_utc = report_timestamp();

    for (int cell = 0; cell < cell_count; ++cell) {
        SeparationCell out;
        out.separation_m = cfg.separations_m[static_cast<std::size_t>(cell)];
        out.separation_s = 2.0 * out.separation_m / kSpeedOfLight;
        out.trial_count = cfg.trials;
        out.below_resolvability_floor = out.separation_s < cfg.step;

        std::vector<double> errs;
        for (int t = 0; t < cfg.trials; ++t) {
            const Trial& r = results[static_cast<std::size_t>(cell * cfg.trials + t)];
            if (r.ok) {
                errs.push_back(r.gap_err);
            } else {
                ++out.failures;
            }
        }
        out.valid = !errs.empty();
        if (out.valid) {
            out.gap_err_median_s = median(errs);
            out.gap_err_mean_s = mean(errs);
            out.gap_err_p90_s = quantile(errs, 0.90);
        }
        report.separation_cells.push_back(out);
    }
    return report;
}

void ClippingConfig::validate() const {
    validate_common(1, lambda, sample_count, step, amplitude_ratio, order, spectral_count);
    if (bits < 1 || bits > 24) throw std::invalid_argument("clipping config: bits in [1, 24]");
    if (dr_multiple <= 0.0) throw std::invalid_argument("clipping config: dr_multiple > 0");
    if (separation_steps <= 0.0) {
        throw std::invalid_argument("clipping config: separation_steps must be > 0");
    }
}

ExperimentReport run_clipping_demo(const ClippingConfig& config) {
    config.validate();
    ClippingConfig cfg = config;
    if (cfg.kernel.coeffs.empty()) cfg.kernel = bench_kernel(12.0 * cfg.step);
    cfg.kernel.validate();

    const int n = cfg.sample_count;
    const double gap = cfg.separation_steps * cfg.step;
    const SceneBounds bounds = delay_bounds(cfg.kernel, cfg.step, n, gap);

    CounterRng rng(CounterRng::derive_key({cfg.seed, kSceneStream, 0, 0}));
    const double tau1 = rng.uniform(bounds.lo, bounds.hi);
    const SpikeTrain truth = make_pair_scene(tau1, gap, cfg.amplitude_ratio,
                                             cfg.dr_multiple * cfg.lambda, cfg.kernel, cfg.step,
                                             n);
    const SampledSignal g = synthesize(truth, cfg.kernel, cfg.step, n);
    const int folds = residue_spikes(modular_decompose(g.values, cfg.lambda).residue).count();

    AcquisitionConfig acq;
    acq.lambda = cfg.lambda;
    acq.bits = cfg.bits;
    acq.seed = CounterRng::derive_key({cfg.seed, kNoiseStream, 0, 0});

    ClippingOutcome outcome;
    outcome.truth = truth;
    outcome.dr_multiple = cfg.dr_multiple;
    outcome.bits = cfg.bits;

    acq.mode = AdcMode::modulo;
    const FoldedSignal y_usf = acquire(g.values, cfg.step, acq);
    const ItersisConfig ic = make_itersis_config(
        cfg.knobs, cfg.lambda, cfg.bits, cfg.spectral_count, folds, cfg.order,
        CounterRng::derive_key({cfg.seed, kSolverStream, 0, 0}));
    const ItersisResult res = itersis_recover(y_usf, cfg.kernel, ic);
    outcome.usf = res.spikes;
    outcome.usf_psnr_db =
        fidelity(g.values, render(res.spikes, cfg.kernel, cfg.step, n).values).psnr_db;

    acq.mode = AdcMode::conventional;
    acq.full_scale = cfg.lambda;
    const FoldedSignal y_conv = acquire(g.values, cfg.step, acq);
    const SpikeTrain conv = solve_p2(finite_difference(y_conv.values, 1), cfg.kernel, cfg.step,
                                     cfg.order, cfg.spectral_count);
    outcome.conventional = conv;
    outcome.conv_psnr_db =
        fidelity(g.values, render(conv, cfg.kernel, cfg.step, n).values).psnr_db;

    ExperimentReport report;
    report.kind = "clipping";
    report.seed = cfg.seed;
    report.trials = 1;
    report.threads = 1;
    report.config_digest = fnv1a_hex(clipping_config_to_json(cfg));
    report.timestamp_utc = report_timestamp();
    report.clipping = std::move(outcome);
    return report;
}

}  // namespace usres
