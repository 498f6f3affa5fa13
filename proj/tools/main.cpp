// usres: modulo-sampling spike recovery and benchmark harness.
//
// Subcommands: kernel-info, simulate, recover, bench-curve,
// bench-separation, bench-clipping. Exit codes: 0 success, 2 config or
// input error, 3 numerical-degeneracy abort.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "usres/bench.hpp"
#include "usres/errors.hpp"
#include "usres/io.hpp"
#include "usres/itersis.hpp"
#include "usres/kernels.hpp"
#include "usres/modulo.hpp"
#include "usres/spectral.hpp"
#include "usres/theorem1.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int trials = 0;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_trials = true) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--seed", flags.seed, "experiment seed")->each([&](const std::string&) {
        flags.seed_set = true;
    });
    if (with_trials) cmd->add_option("--trials", flags.trials, "trials per cell");
    cmd->add_option("--threads", flags.threads, "worker threads");
}

std::string base_dir_of(const std::string& path) {
    const fs::path p(path);
    return p.has_parent_path() ? p.parent_path().string() : std::string();
}

void ensure_out_dir(const std::string& dir) { fs::create_directories(dir); }

int run_kernel_info(const std::string& kernel_path, double window, int max_index) {
    const usres::KernelModel kernel = usres::load_kernel(kernel_path);
    const usres::Interval sup = kernel.support();
    if (window <= 0.0) window = 4.0 * sup.width();

    std::printf("kernel: order L=%d, gamma=%.6g s, %zu coefficients\n", kernel.order,
                kernel.gamma, kernel.coeffs.size());
    std::printf("support: [%.6g, %.6g] s (width %.6g s)\n", sup.lo, sup.hi, sup.width());
    std::printf("area: %.9g V.s   sup norm: %.9g V\n", usres::kernel_area(kernel),
                usres::kernel_sup_norm(kernel));
    std::printf("favard K_L: %.12g\n", usres::favard_constant(kernel.order));
    if (kernel.order >= 1 && max_index >= 1) {
        std::printf("approximation bound rho_L (window %.6g s, I=%d): %.6e\n", window,
                    max_index, usres::approximation_error_bound(kernel, window, max_index));
    }
    for (int h = 0; h <= kernel.order; ++h) {
        std::printf("derivative sup bound h=%d: %.9g\n", h,
                    usres::derivative_sup_bound(kernel, h));
    }
    return 0;
}

int run_simulate(const CommonFlags& flags) {
    if (flags.config_path.empty()) {
        throw std::invalid_argument("simulate: --config is required");
    }
    const ordered_json j = ordered_json::parse(usres::read_text_file(flags.config_path));

    usres::KernelModel kernel;
    if (j.contains("kernel")) {
        kernel = usres::kernel_from_json(j.at("kernel").dump());
    } else if (j.contains("kernel_file")) {
        fs::path p = j.at("kernel_file").get<std::string>();
        if (p.is_relative()) p = fs::path(base_dir_of(flags.config_path)) / p;
        kernel = usres::load_kernel(p.string());
    } else {
        throw std::invalid_argument("simulate: config needs 'kernel' or 'kernel_file'");
    }

    usres::SpikeTrain spikes;
    const ordered_json& scene = j.at("scene");
    if (scene.contains("distances_m")) {
        usres::SceneSpec spec;
        spec.distances_m = scene.at("distances_m").get<std::vector<double>>();
        spec.reflectivities = scene.at("reflectivities").get<std::vector<double>>();
        spikes = usres::make_tof_scene(spec);
    } else {
        spikes.delays = scene.at("delays_s").get<std::vector<double>>();
        spikes.amplitudes = scene.at("amplitudes").get<std::vector<double>>();
    }

    const double step = j.at("step").get<double>();
    const int count = j.at("sample_count").get<int>();

    usres::AcquisitionConfig acq;
    const ordered_json& a = j.at("acquisition");
    acq.lambda = a.at("lambda").get<double>();
    if (a.contains("bits")) acq.bits = a.at("bits").get<int>();
    if (a.contains("mode")) acq.mode = usres::adc_mode_from_string(a.at("mode").get<std::string>());
    if (a.contains("full_scale")) acq.full_scale = a.at("full_scale").get<double>();
    if (a.contains("noise_sigma")) acq.noise_sigma = a.at("noise_sigma").get<double>();
    if (a.contains("seed")) acq.seed = a.at("seed").get<std::uint64_t>();
    if (flags.seed_set) acq.seed = flags.seed;

    const usres::SampledSignal g = usres::synthesize(spikes, kernel, step, count);
    const usres::FoldedSignal y = usres::acquire(g.values, step, acq);

    ensure_out_dir(flags.out_dir);
    const fs::path out(flags.out_dir);
    usres::save_folded(y, (out / "y.csv").string(), (out / "y.json").string());
    usres::save_sampled(g, (out / "clean.csv").string());
    usres::save_spikes(spikes, (out / "truth_spikes.json").string());
    usres::save_kernel(kernel, (out / "kernel.json").string());
    std::printf("wrote %s/{y.csv,y.json,clean.csv,truth_spikes.json,kernel.json}\n",
                flags.out_dir.c_str());
    return 0;
}

int run_recover(const CommonFlags& flags, const std::string& method,
                const std::string& signal_path, std::string sidecar_path,
                const std::string& kernel_path, const std::string& params_path) {
    if (sidecar_path.empty()) {
        // Convention: y.csv is described by y.json next to it.
        sidecar_path = (fs::path(signal_path).replace_extension(".json")).string();
    }
    const usres::FoldedSignal y = usres::load_folded(signal_path, sidecar_path);
    const usres::KernelModel kernel = usres::load_kernel(kernel_path);
    ensure_out_dir(flags.out_dir);
    const fs::path out(flags.out_dir);

    if (method == "theorem1") {
        usres::Theorem1Params params =
            usres::theorem1_params_from_json(usres::read_text_file(params_path));
        if (params.window <= 0.0) params.window = y.window();
        const usres::SpikeTrain spikes = usres::recover_exact(y, kernel, params);
        usres::save_spikes(spikes, (out / "spikes.json").string());
        std::printf("wrote %s/spikes.json (%d spikes)\n", flags.out_dir.c_str(), spikes.count());
        return 0;
    }
    if (method == "itersis") {
        usres::ItersisConfig cfg =
            usres::itersis_config_from_json(usres::read_text_file(params_path));
        if (cfg.sigma_stop <= 0.0) {
            cfg.sigma_stop = usres::ItersisConfig::default_sigma(y.lambda, y.bits);
        }
        if (flags.seed_set) cfg.seed = flags.seed;
        const usres::ItersisResult res = usres::itersis_recover(y, kernel, cfg);
        usres::save_spikes(res.spikes, (out / "spikes.json").string());
        usres::save_residue(res.residue, (out / "residue.json").string());
        usres::write_text_file((out / "trace.csv").string(), usres::trace_to_csv(res.trace));
        std::printf("wrote %s/{spikes.json,residue.json,trace.csv} (%d spikes, %d folds, %s)\n",
                    flags.out_dir.c_str(), res.spikes.count(), res.residue.count(),
                    res.converged ? "converged" : "not converged");
        return 0;
    }
    throw std::invalid_argument("recover: method must be theorem1 or itersis");
}

template <typename Config, typename Parser, typename Runner>
int run_bench(const CommonFlags& flags, Parser parse, Runner run, const char* name) {
    Config cfg;
    if (!flags.config_path.empty()) {
        cfg = parse(usres::read_text_file(flags.config_path), base_dir_of(flags.config_path));
    }
    if (flags.seed_set) cfg.seed = flags.seed;
    if constexpr (requires { cfg.trials; }) {
        if (flags.trials > 0) cfg.trials = flags.trials;
    }
    if constexpr (requires { cfg.threads; }) {
        if (flags.threads > 0) cfg.threads = flags.threads;
    }
    const usres::ExperimentReport report = run(cfg);
    ensure_out_dir(flags.out_dir);
    const fs::path out(flags.out_dir);
    const std::string json_path = (out / (std::string(name) + "_report.json")).string();
    const std::string csv_path = (out / (std::string(name) + "_report.csv")).string();
    usres::save_report(report, json_path, csv_path);
    std::printf("wrote %s and %s\n", json_path.c_str(), csv_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"off-the-grid spike recovery from modulo-folded, coarsely quantized samples"};
    app.require_subcommand(1);

    // kernel-info
    auto* info = app.add_subcommand("kernel-info", "print kernel constants and bounds");
    std::string info_kernel;
    double info_window = 0.0;
    int info_max_index = 8;
    info->add_option("--kernel", info_kernel, "kernel JSON file")->required();
    info->add_option("--window", info_window, "analysis window in seconds (default 4x support)");
    info->add_option("--max-index", info_max_index, "Fourier truncation index");

    // simulate
    auto* sim = app.add_subcommand("simulate", "synthesize a scene and acquire folded samples");
    CommonFlags sim_flags;
    add_common(sim, sim_flags, /*with_trials=*/false);

    // recover
    auto* rec = app.add_subcommand("recover", "recover spikes from folded samples");
    CommonFlags rec_flags;
    std::string rec_method, rec_signal, rec_sidecar, rec_kernel, rec_params;
    rec->add_option("--method", rec_method, "theorem1 | itersis")->required();
    rec->add_option("--signal", rec_signal, "folded-signal CSV")->required();
    rec->add_option("--sidecar", rec_sidecar, "sidecar JSON (default: signal with .json)");
    rec->add_option("--kernel", rec_kernel, "kernel JSON file")->required();
    rec->add_option("--params", rec_params, "recovery parameter JSON")->required();
    add_common(rec, rec_flags, /*with_trials=*/false);

    // benches
    auto* curve = app.add_subcommand("bench-curve", "bit-budget x dynamic-range gain grid");
    CommonFlags curve_flags;
    add_common(curve, curve_flags);
    auto* sepcmd = app.add_subcommand("bench-separation", "separation sweep at a low bit budget");
    CommonFlags sep_flags;
    add_common(sepcmd, sep_flags);
    auto* clip = app.add_subcommand("bench-clipping", "deterministic clipping comparison");
    CommonFlags clip_flags;
    add_common(clip, clip_flags, /*with_trials=*/false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (info->parsed()) return run_kernel_info(info_kernel, info_window, info_max_index);
        if (sim->parsed()) return run_simulate(sim_flags);
        if (rec->parsed()) {
            return run_recover(rec_flags, rec_method, rec_signal, rec_sidecar, rec_kernel,
                               rec_params);
        }
        if (curve->parsed()) {
            return run_bench<usres::CurveConfig>(curve_flags, usres::curve_config_from_json,
                                                 usres::run_curve, "curve");
        }
        if (sepcmd->parsed()) {
            return run_bench<usres::SeparationConfig>(sep_flags,
                                                      usres::separation_config_from_json,
                                                      usres::run_separation_sweep, "separation");
        }
        if (clip->parsed()) {
            return run_bench<usres::ClippingConfig>(clip_flags, usres::clipping_config_from_json,
                                                    usres::run_clipping_demo, "clipping");
        }
    } catch (const usres::degeneracy_error& e) {
        std::fprintf(stderr, "numerical degeneracy: %s\n", e.what());
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
