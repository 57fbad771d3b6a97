#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sas/config.hpp"
#include "sas/trace_io.hpp"

namespace sas {

inline constexpr std::string_view kReportFormat = "sas-report/1";

struct CriterionResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    std::string unit;
    std::string requirement;  // human-readable bound, e.g. "> 30"
};

struct Quantity {
    std::string name;
    double value = 0.0;
    std::string unit;
};

struct ExperimentReport {
    std::string experiment;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<CriterionResult> criteria;
    std::vector<Quantity> values;
    std::vector<std::string> artifacts;  // relative to the output directory
    std::vector<std::string> notes;

    bool passed() const;
    const Quantity* value(std::string_view name) const;
    const CriterionResult* criterion(std::string_view name) const;
};

/// Where artifacts go; nothing is written when `dir` is empty.
struct OutputSpec {
    std::filesystem::path dir;
};

/// F(delta) = exp(-4 ln2 (delta / dnuD)^2): the Doppler profile of the
/// target line at laser detuning `delta` from its centre, peak 1.
double fluorescence_proxy(double delta_hz, double doppler_fwhm_hz);

ExperimentReport run_sweep_experiment(const ScenarioConfig& cfg, const OutputSpec& out = {});
ExperimentReport run_lock_experiment(const ScenarioConfig& cfg, const OutputSpec& out = {});
/// Runs the configured step and its mirror image (-step_k).
ExperimentReport run_temp_step_experiment(const ScenarioConfig& cfg, const OutputSpec& out = {});
ExperimentReport run_fluorescence_experiment(const ScenarioConfig& cfg, const OutputSpec& out = {});

struct AnalyzeOptions {
    ColumnMap columns;
    Calibration calibration;
};

/// Depth markers of a saved sweep (sas-trace/1) or a raw scope export, which
/// is calibrated with ingest_scope_csv.
ExperimentReport run_analyze(const std::filesystem::path& csv, const ScenarioConfig& cfg,
                             const AnalyzeOptions& options = {}, const OutputSpec& out = {});

std::string report_json(const ExperimentReport& report);
std::string report_csv(const ExperimentReport& report);

/// Standard thresholds of the depth ratios, percent.
struct DepthThresholds {
    double doppler = 30.0;
    double hyperfine = 2.5;
    double crossover = 15.0;
};

}  // namespace sas
