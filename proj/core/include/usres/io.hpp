#pragma once

#include <string>
#include <vector>

#include "usres/bench.hpp"
#include "usres/forward_model.hpp"
#include "usres/itersis.hpp"
#include "usres/kernels.hpp"
#include "usres/modulo.hpp"
#include "usres/theorem1.hpp"

namespace usres {

// Kernel definitions: JSON {"coeffs": [..], "gamma": .., "order": ..}.
KernelModel kernel_from_json(const std::string& text);
std::string kernel_to_json(const KernelModel& model);
KernelModel load_kernel(const std::string& path);
void save_kernel(const KernelModel& model, const std::string& path);

// Spike trains: JSON {"amplitudes": [..], "delays_s": [..]}.
SpikeTrain spikes_from_json(const std::string& text);
std::string spikes_to_json(const SpikeTrain& spikes);
SpikeTrain load_spikes(const std::string& path);
void save_spikes(const SpikeTrain& spikes, const std::string& path);

// Fold corrections: JSON {"amplitudes": [..], "positions": [..]}.
std::string residue_to_json(const ResidueModel& model);
void save_residue(const ResidueModel& model, const std::string& path);

// Folded signals: CSV "n,y" plus a JSON sidecar
// {"lambda", "bits", "mode", "step", "seed"} (+"full_scale" when conventional).
void save_folded(const FoldedSignal& y, const std::string& csv_path,
                 const std::string& sidecar_path);
FoldedSignal load_folded(const std::string& csv_path, const std::string& sidecar_path);

// Sampled signals: CSV "n,g".
void save_sampled(const SampledSignal& g, const std::string& path);
SampledSignal load_sampled(const std::string& path, double step);

// Recovery parameter files.
ItersisConfig itersis_config_from_json(const std::string& text);
std::string itersis_config_to_json(const ItersisConfig& cfg);
Theorem1Params theorem1_params_from_json(const std::string& text);
std::string theorem1_params_to_json(const Theorem1Params& p);

// Benchmark configs; "kernel" may be an inline object or a
// {"kernel_file": path} reference. Missing keys keep their defaults.
CurveConfig curve_config_from_json(const std::string& text, const std::string& base_dir);
SeparationConfig separation_config_from_json(const std::string& text,
                                             const std::string& base_dir);
ClippingConfig clipping_config_from_json(const std::string& text, const std::string& base_dir);
std::string curve_config_to_json(const CurveConfig& config);
std::string separation_config_to_json(const SeparationConfig& config);
std::string clipping_config_to_json(const ClippingConfig& config);

// Reports.
std::string report_to_json(const ExperimentReport& report);
std::string report_to_csv(const ExperimentReport& report);
void save_report(const ExperimentReport& report, const std::string& json_path,
                 const std::string& csv_path);

// Per-iteration diagnostics: CSV "iter,mse,stop_norm".
std::string trace_to_csv(const std::vector<IterationRecord>& trace);

/// 64-bit FNV-1a of a string, hex-encoded; used as the config digest.
std::string fnv1a_hex(const std::string& text);

/// ISO-8601 UTC timestamp; honors SOURCE_DATE_EPOCH so report files can
/// be byte-identical across reruns.
std::string report_timestamp();

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace usres
