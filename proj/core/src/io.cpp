#include "usres/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace usres {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ordered_json parse(const std::string& text, const char* what) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string(what) + ": malformed JSON: " + e.what());
    }
}

template <typename T>
void read_if(const ordered_json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

KernelModel kernel_from(const ordered_json& j) {
    KernelModel model;
    model.coeffs = j.at("coeffs").get<std::vector<double>>();
    model.gamma = j.at("gamma").get<double>();
    model.order = j.at("order").get<int>();
    model.validate();
    return model;
}

ordered_json kernel_json(const KernelModel& model) {
    return ordered_json{{"coeffs", model.coeffs}, {"gamma", model.gamma}, {"order", model.order}};
}

void read_kernel_field(const ordered_json& j, const std::string& base_dir, KernelModel& out) {
    if (j.contains("kernel")) {
        out = kernel_from(j.at("kernel"));
    } else if (j.contains("kernel_file")) {
        std::filesystem::path p = j.at("kernel_file").get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        out = load_kernel(p.string());
    }
}

void read_knobs(const ordered_json& j, ItersisKnobs& knobs) {
    if (!j.contains("itersis")) return;
    const ordered_json& k = j.at("itersis");
    read_if(k, "init_count", knobs.init_count);
    read_if(k, "inner_max", knobs.inner_max);
    read_if(k, "outer_max", knobs.outer_max);
    read_if(k, "sigma_scale", knobs.sigma_scale);
}

ordered_json knobs_json(const ItersisKnobs& knobs) {
    return ordered_json{{"init_count", knobs.init_count},
                        {"inner_max", knobs.inner_max},
                        {"outer_max", knobs.outer_max},
                        {"sigma_scale", knobs.sigma_scale}};
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

KernelModel kernel_from_json(const std::string& text) {
    return kernel_from(parse(text, "kernel"));
}

std::string kernel_to_json(const KernelModel& model) { return kernel_json(model).dump(2) + "\n"; }

KernelModel load_kernel(const std::string& path) { return kernel_from_json(read_text_file(path)); }

void save_kernel(const KernelModel& model, const std::string& path) {
    write_text_file(path, kernel_to_json(model));
}

SpikeTrain spikes_from_json(const std::string& text) {
    const ordered_json j = parse(text, "spike train");
    SpikeTrain spikes;
    spikes.amplitudes = j.at("amplitudes").get<std::vector<double>>();
    spikes.delays = j.at("delays_s").get<std::vector<double>>();
    if (spikes.amplitudes.size() != spikes.delays.size()) {
        throw std::invalid_argument("spike train: amplitudes/delays_s length mismatch");
    }
    return spikes;
}

std::string spikes_to_json(const SpikeTrain& spikes) {
    return ordered_json{{"amplitudes", spikes.amplitudes}, {"delays_s", spikes.delays}}.dump(2) +
           "\n";
}

SpikeTrain load_spikes(const std::string& path) { return spikes_from_json(read_text_file(path)); }

void save_spikes(const SpikeTrain& spikes, const std::string& path) {
    write_text_file(path, spikes_to_json(spikes));
}

std::string residue_to_json(const ResidueModel& model) {
    return ordered_json{{"amplitudes", model.amplitudes}, {"positions", model.positions}}.dump(2) +
           "\n";
}

void save_residue(const ResidueModel& model, const std::string& path) {
    write_text_file(path, residue_to_json(model));
}

void save_folded(const FoldedSignal& y, const std::string& csv_path,
                 const std::string& sidecar_path) {
    std::ostringstream csv;
    csv << "n,y\n";
    for (int n = 0; n < y.count(); ++n) {
        csv << n << "," << format_double(y.values[static_cast<std::size_t>(n)]) << "\n";
    }
    write_text_file(csv_path, csv.str());

    ordered_json sidecar{{"lambda", y.lambda},
                         {"bits", y.bits},
                         {"mode", to_string(y.mode)},
                         {"step", y.step},
                         {"seed", y.seed}};
    if (y.mode == AdcMode::conventional) sidecar["full_scale"] = y.full_scale;
    write_text_file(sidecar_path, sidecar.dump(2) + "\n");
}

FoldedSignal load_folded(const std::string& csv_path, const std::string& sidecar_path) {
    const ordered_json j = parse(read_text_file(sidecar_path), "folded-signal sidecar");
    FoldedSignal y;
    y.lambda = j.at("lambda").get<double>();
    y.bits = j.at("bits").get<int>();
    y.mode = adc_mode_from_string(j.at("mode").get<std::string>());
    y.step = j.at("step").get<double>();
    y.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("full_scale")) y.full_scale = j.at("full_scale").get<double>();
    if (y.mode == AdcMode::modulo) y.full_scale = y.lambda;

    std::istringstream in(read_text_file(csv_path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("n,y", 0) != 0) {
        throw std::invalid_argument("folded-signal CSV: expected header 'n,y'");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("folded-signal CSV: malformed row: " + line);
        }
        y.values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (y.values.empty()) throw std::invalid_argument("folded-signal CSV: no samples");
    return y;
}

void save_sampled(const SampledSignal& g, const std::string& path) {
    std::ostringstream csv;
    csv << "n,g\n";
    for (int n = 0; n < g.count(); ++n) {
        csv << n << "," << format_double(g.values[static_cast<std::size_t>(n)]) << "\n";
    }
    write_text_file(path, csv.str());
}

SampledSignal load_sampled(const std::string& path, double step) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("n,g", 0) != 0) {
        throw std::invalid_argument("sampled-signal CSV: expected header 'n,g'");
    }
    SampledSignal g;
    g.step = step;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("sampled-signal CSV: malformed row: " + line);
        }
        g.values.push_back(std::stod(line.substr(comma + 1)));
    }
    return g;
}

ItersisConfig itersis_config_from_json(const std::string& text) {
    const ordered_json j = parse(text, "itersis config");
    ItersisConfig cfg;
    read_if(j, "outer_max", cfg.outer_max);
    read_if(j, "inner_max", cfg.inner_max);
    read_if(j, "init_count", cfg.init_count);
    read_if(j, "sigma_stop", cfg.sigma_stop);  // 0 = derive from lambda and bits
    read_if(j, "spectral_count", cfg.spectral_count);
    j.at("fold_count").get_to(cfg.fold_count);
    j.at("order").get_to(cfg.order);
    read_if(j, "seed", cfg.seed);
    return cfg;
}

std::string itersis_config_to_json(const ItersisConfig& cfg) {
    return ordered_json{{"outer_max", cfg.outer_max},   {"inner_max", cfg.inner_max},
                        {"init_count", cfg.init_count}, {"sigma_stop", cfg.sigma_stop},
                        {"spectral_count", cfg.spectral_count}, {"fold_count", cfg.fold_count},
                        {"order", cfg.order},           {"seed", cfg.seed}}
               .dump(2) +
           "\n";
}

Theorem1Params theorem1_params_from_json(const std::string& text) {
    const ordered_json j = parse(text, "theorem1 params");
    Theorem1Params p;
    j.at("spike_count").get_to(p.spike_count);
    j.at("kernel_order").get_to(p.kernel_order);
    j.at("diff_order").get_to(p.diff_order);
    j.at("gamma").get_to(p.gamma);
    j.at("lambda").get_to(p.lambda);
    read_if(j, "zeta", p.zeta);
    j.at("tv_norm").get_to(p.tv_norm);
    j.at("kernel_sup").get_to(p.kernel_sup);
    p.window = 0.0;  // optional: the CLI derives it from the signal
    read_if(j, "window", p.window);
    read_if(j, "spectral_count", p.spectral_count);
    return p;
}

std::string theorem1_params_to_json(const Theorem1Params& p) {
    return ordered_json{{"spike_count", p.spike_count},
                        {"kernel_order", p.kernel_order},
                        {"diff_order", p.diff_order},
                        {"gamma", p.gamma},
                        {"lambda", p.lambda},
                        {"zeta", p.zeta},
                        {"tv_norm", p.tv_norm},
                        {"kernel_sup", p.kernel_sup},
                        {"window", p.window},
                        {"spectral_count", p.spectral_count}}
               .dump(2) +
           "\n";
}

CurveConfig curve_config_from_json(const std::string& text, const std::string& base_dir) {
    const ordered_json j = parse(text, "curve config");
    CurveConfig cfg;
    read_if(j, "bits", cfg.bits);
    read_if(j, "dr_multiples", cfg.dr_multiples);
    read_if(j, "trials", cfg.trials);
    read_if(j, "lambda", cfg.lambda);
    read_kernel_field(j, base_dir, cfg.kernel);
    read_if(j, "sample_count", cfg.sample_count);
    read_if(j, "step", cfg.step);
    read_if(j, "separation_steps", cfg.separation_steps);
    read_if(j, "amplitude_ratio", cfg.amplitude_ratio);
    read_if(j, "noise_sigma", cfg.noise_sigma);
    read_if(j, "order", cfg.order);
    read_if(j, "spectral_count", cfg.spectral_count);
    read_knobs(j, cfg.knobs);
    read_if(j, "seed", cfg.seed);
    read_if(j, "threads", cfg.threads);
    return cfg;
}

SeparationConfig separation_config_from_json(const std::string& text,
                                             const std::string& base_dir) {
    const ordered_json j = parse(text, "separation config");
    SeparationConfig cfg;
    read_if(j, "separations_m", cfg.separations_m);
    read_if(j, "trials", cfg.trials);
    read_if(j, "bits", cfg.bits);
    read_if(j, "dr_multiple", cfg.dr_multiple);
    read_if(j, "lambda", cfg.lambda);
    read_kernel_field(j, base_dir, cfg.kernel);
    read_if(j, "sample_count", cfg.sample_count);
    read_if(j, "step", cfg.step);
    read_if(j, "amplitude_ratio", cfg.amplitude_ratio);
    read_if(j, "noise_sigma", cfg.noise_sigma);
    read_if(j, "order", cfg.order);
    read_if(j, "spectral_count", cfg.spectral_count);
    read_knobs(j, cfg.knobs);
    read_if(j, "seed", cfg.seed);
    read_if(j, "threads", cfg.threads);
    return cfg;
}

ClippingConfig clipping_config_from_json(const std::string& text, const std::string& base_dir) {
    const ordered_json j = parse(text, "clipping config");
    ClippingConfig cfg;
    read_if(j, "dr_multiple", cfg.dr_multiple);
    read_if(j, "bits", cfg.bits);
    read_if(j, "lambda", cfg.lambda);
    read_kernel_field(j, base_dir, cfg.kernel);
    read_if(j, "sample_count", cfg.sample_count);
    read_if(j, "step", cfg.step);
    read_if(j, "separation_steps", cfg.separation_steps);
    read_if(j, "amplitude_ratio", cfg.amplitude_ratio);
    read_if(j, "order", cfg.order);
    read_if(j, "spectral_count", cfg.spectral_count);
    read_knobs(j, cfg.knobs);
    read_if(j, "seed", cfg.seed);
    return cfg;
}

std::string curve_config_to_json(const CurveConfig& cfg) {
    return ordered_json{{"bits", cfg.bits},
                        {"dr_multiples", cfg.dr_multiples},
                        {"trials", cfg.trials},
                        {"lambda", cfg.lambda},
                        {"kernel", kernel_json(cfg.kernel)},
                        {"sample_count", cfg.sample_count},
                        {"step", cfg.step},
                        {"separation_steps", cfg.separation_steps},
                        {"amplitude_ratio", cfg.amplitude_ratio},
                        {"noise_sigma", cfg.noise_sigma},
                        {"order", cfg.order},
                        {"spectral_count", cfg.spectral_count},
                        {"itersis", knobs_json(cfg.knobs)},
                        {"seed", cfg.seed}}
               .dump(2) +
           "\n";
}

std::string separation_config_to_json(const SeparationConfig& cfg) {
    return ordered_json{{"separations_m", cfg.separations_m},
                        {"trials", cfg.trials},
                        {"bits", cfg.bits},
                        {"dr_multiple", cfg.dr_multiple},
                        {"lambda", cfg.lambda},
                        {"kernel", kernel_json(cfg.kernel)},
                        {"sample_count", cfg.sample_count},
                        {"step", cfg.step},
                        {"amplitude_ratio", cfg.amplitude_ratio},
                        {"noise_sigma", cfg.noise_sigma},
                        {"order", cfg.order},
                        {"spectral_count", cfg.spectral_count},
                        {"itersis", knobs_json(cfg.knobs)},
                        {"seed", cfg.seed}}
               .dump(2) +
           "\n";
}

std::string clipping_config_to_json(const ClippingConfig& cfg) {
    return ordered_json{{"dr_multiple", cfg.dr_multiple},
                        {"bits", cfg.bits},
                        {"lambda", cfg.lambda},
                        {"kernel", kernel_json(cfg.kernel)},
                        {"sample_count", cfg.sample_count},
                        {"step", cfg.step},
                        {"separation_steps", cfg.separation_steps},
                        {"amplitude_ratio", cfg.amplitude_ratio},
                        {"order", cfg.order},
                        {"spectral_count", cfg.spectral_count},
                        {"itersis", knobs_json(cfg.knobs)},
                        {"seed", cfg.seed}}
               .dump(2) +
           "\n";
}

namespace {

ordered_json spikes_json(const SpikeTrain& s) {
    return ordered_json{{"amplitudes", s.amplitudes}, {"delays_s", s.delays}};
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
    ordered_json j;
    j["kind"] = report.kind;
    j["seed"] = report.seed;
    j["trials"] = report.trials;
    j["config_digest"] = report.config_digest;
    j["timestamp_utc"] = report.timestamp_utc;
    if (!report.curve_cells.empty()) {
        ordered_json cells = ordered_json::array();
        for (const CurveCell& c : report.curve_cells) {
            cells.push_back(ordered_json{{"bits", c.bits},
                                         {"dr_multiple", c.dr_multiple},
                                         {"trial_count", c.trial_count},
                                         {"usf_failures", c.usf_failures},
                                         {"conv_failures", c.conv_failures},
                                         {"usf_mse_db_median", c.usf_mse_db_median},
                                         {"usf_mse_db_mean", c.usf_mse_db_mean},
                                         {"conv_mse_db_median", c.conv_mse_db_median},
                                         {"conv_mse_db_mean", c.conv_mse_db_mean},
                                         {"gain_db", c.gain_db},
                                         {"usf_delay_err_p10_s", c.usf_delay_err_p10_s},
                                         {"usf_delay_err_p50_s", c.usf_delay_err_p50_s},
                                         {"usf_delay_err_p90_s", c.usf_delay_err_p90_s},
                                         {"valid", c.valid}});
        }
        j["cells"] = std::move(cells);
    }
    if (!report.separation_cells.empty()) {
        ordered_json cells = ordered_json::array();
        for (const SeparationCell& c : report.separation_cells) {
            cells.push_back(ordered_json{
                {"separation_m", c.separation_m},
                {"separation_s", c.separation_s},
                {"trial_count", c.trial_count},
                {"failures", c.failures},
                {"gap_err_median_s", c.gap_err_median_s},
                {"gap_err_mean_s", c.gap_err_mean_s},
                {"gap_err_p90_s", c.gap_err_p90_s},
                {"below_resolvability_floor", c.below_resolvability_floor},
                {"valid", c.valid}});
        }
        j["cells"] = std::move(cells);
    }
    if (report.clipping.has_value()) {
        const ClippingOutcome& c = *report.clipping;
        j["clipping"] = ordered_json{{"dr_multiple", c.dr_multiple},
                                     {"bits", c.bits},
                                     {"usf_psnr_db", c.usf_psnr_db},
                                     {"conv_psnr_db", c.conv_psnr_db},
                                     {"truth", spikes_json(c.truth)},
                                     {"usf", spikes_json(c.usf)},
                                     {"conventional", spikes_json(c.conventional)}};
    }
    return j.dump(2) + "\n";
}

std::string report_to_csv(const ExperimentReport& report) {
    std::ostringstream csv;
    if (report.kind == "curve") {
        csv << "bits,dr,usf_mse_db,conv_mse_db,gain_db\n";
        for (const CurveCell& c : report.curve_cells) {
            csv << c.bits << "," << format_double(c.dr_multiple) << ","
                << format_double(c.usf_mse_db_median) << ","
                << format_double(c.conv_mse_db_median) << "," << format_double(c.gain_db) << "\n";
        }
    } else if (report.kind == "separation") {
        csv << "separation_m,separation_s,gap_err_median_s,gap_err_p90_s\n";
        for (const SeparationCell& c : report.separation_cells) {
            csv << format_double(c.separation_m) << "," << format_double(c.separation_s) << ","
                << format_double(c.gap_err_median_s) << "," << format_double(c.gap_err_p90_s)
                << "\n";
        }
    } else if (report.kind == "clipping" && report.clipping.has_value()) {
        csv << "path,psnr_db\n";
        csv << "usf," << format_double(report.clipping->usf_psnr_db) << "\n";
        csv << "conventional," << format_double(report.clipping->conv_psnr_db) << "\n";
    }
    return csv.str();
}

void save_report(const ExperimentReport& report, const std::string& json_path,
                 const std::string& csv_path) {
    write_text_file(json_path, report_to_json(report));
    write_text_file(csv_path, report_to_csv(report));
}

std::string trace_to_csv(const std::vector<IterationRecord>& trace) {
    std::ostringstream csv;
    csv << "iter,mse,stop_norm\n";
    for (const IterationRecord& r : trace) {
        csv << r.iter << "," << format_double(r.mse) << "," << format_double(r.stop_norm) << "\n";
    }
    return csv.str();
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, hash);
    return buf;
}

std::string report_timestamp() {
    std::time_t t;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace usres
