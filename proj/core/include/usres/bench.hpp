#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "usres/forward_model.hpp"
#include "usres/itersis.hpp"
#include "usres/kernels.hpp"

namespace usres {

/// Iteration budgets handed to the per-trial recoveries. The stopping
/// threshold is sigma_scale * 2 * lambda / 2^bits.
struct ItersisKnobs {
    int init_count = 6;
    int inner_max = 10;
    int outer_max = 8;
    double sigma_scale = 1.0;
};

/// The order-3 spline kernel shipped with the benchmarks
/// (data/kernels/bench_spline3.json), rescaled to the given grid scale.
KernelModel bench_kernel(double gamma);

/// Bit-budget X dynamic-range grid of the modulo-vs-conventional
/// comparison: a weak-strong spike pair at fixed separation, recovered
/// from both acquisition paths at equal bit budget.
struct CurveConfig {
    std::vector<int> bits{3, 6, 9, 12, 15};
    std::vector<double> dr_multiples{10.0, 20.0, 30.0};
    int trials = 200;
    double lambda = 0.1;  ///< volts
    KernelModel kernel;   ///< empty coeffs = use bench_kernel(12 * step)
    int sample_count = 501;
    double step = 0.77e-9;      ///< seconds
    double separation_steps = 75.0;  ///< spike gap in sample steps
    double amplitude_ratio = 10.0;   ///< strong/weak
    double noise_sigma = 0.0;        ///< volts, pre-fold
    int order = 2;                   ///< K
    int spectral_count = 12;         ///< I_fr
    ItersisKnobs knobs;
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const;
};

/// Shrinking two-target separation sweep at a fixed low bit budget.
struct SeparationConfig {
    std::vector<double> separations_m{1.6, 1.3, 1.0, 0.7};
    int trials = 50;
    int bits = 3;
    double dr_multiple = 10.0;
    double lambda = 0.1;
    KernelModel kernel;
    int sample_count = 501;
    double step = 0.77e-9;
    double amplitude_ratio = 2.0;
    double noise_sigma = 0.0;
    int order = 2;
    int spectral_count = 12;
    ItersisKnobs knobs;
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const;
};

/// One deterministic high-dynamic-range instance comparing the clipped
/// conventional path against the folded path.
struct ClippingConfig {
    double dr_multiple = 20.0;
    int bits = 4;
    double lambda = 0.05;
    KernelModel kernel;
    int sample_count = 501;
    double step = 0.77e-9;
    double separation_steps = 75.0;
    double amplitude_ratio = 10.0;
    int order = 2;
    int spectral_count = 12;
    ItersisKnobs knobs;
    std::uint64_t seed = 1;

    void validate() const;
};

struct CurveCell {
    int bits = 0;
    double dr_multiple = 0.0;
    int trial_count = 0;
    int usf_failures = 0;
    int conv_failures = 0;
    double usf_mse_db_median = 0.0;
    double usf_mse_db_mean = 0.0;
    double conv_mse_db_median = 0.0;
    double conv_mse_db_mean = 0.0;
    double gain_db = 0.0;  ///< conv_mse_db_median - usf_mse_db_median
    double usf_delay_err_p10_s = 0.0;
    double usf_delay_err_p50_s = 0.0;
    double usf_delay_err_p90_s = 0.0;
    bool valid = false;
};

struct SeparationCell {
    double separation_m = 0.0;
    double separation_s = 0.0;
    int trial_count = 0;
    int failures = 0;
    double gap_err_median_s = 0.0;
    double gap_err_mean_s = 0.0;
    double gap_err_p90_s = 0.0;
    bool below_resolvability_floor = false;  ///< separation under one sample step
    bool valid = false;
};

struct ClippingOutcome {
    SpikeTrain truth;
    SpikeTrain usf;
    SpikeTrain conventional;
    double usf_psnr_db = 0.0;
    double conv_psnr_db = 0.0;
    double dr_multiple = 0.0;
    int bits = 0;
};

struct ExperimentReport {
    std::string kind;  ///< "curve" | "separation" | "clipping"
    std::vector<CurveCell> curve_cells;
    std::vector<SeparationCell> separation_cells;
    std::optional<ClippingOutcome> clipping;
    std::uint64_t seed = 0;
    int trials = 0;
    int threads = 1;
    std::string config_digest;   ///< FNV-1a of the canonical config JSON
    std::string timestamp_utc;   ///< honors SOURCE_DATE_EPOCH for reproducible output
};

ExperimentReport run_curve(const CurveConfig& config);
ExperimentReport run_separation_sweep(const SeparationConfig& config);
ExperimentReport run_clipping_demo(const ClippingConfig& config);

/// Runs body(0..count-1) on a worker pool. Output must be keyed by the
/// index so results are identical for any worker count.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace usres
