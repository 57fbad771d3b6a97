#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "sas/atomic_data.hpp"
#include "sas/closed_loop.hpp"
#include "sas/spectrum.hpp"

namespace sas {

inline constexpr std::string_view kTraceFormat = "sas-trace/1";
inline constexpr std::string_view kLockLogFormat = "sas-locklog/1";

/// `# key=value` metadata lines, then `detuning_hz,reference_v,probe_v,differential_v`.
void write_trace_csv(std::ostream& out, const SweepTrace& trace);
std::string trace_csv(const SweepTrace& trace);
/// Throws ParseError with line numbers, ValidationError for a bad axis.
SweepTrace parse_trace_csv(std::string_view text);

void write_lock_log_csv(std::ostream& out, const TimeSeriesLog& log);
std::string lock_log_csv(const TimeSeriesLog& log);
TimeSeriesLog parse_lock_log_csv(std::string_view text);

/// Reads a whole file; throws Error when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
/// Writes bytes exactly; throws Error when the path is unwritable.
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Header names of the oscilloscope columns. An empty `differential` means
/// probe - reference is computed.
struct ColumnMap {
    std::string time = "time_s";
    std::string reference = "reference_v";
    std::string probe = "probe_v";
    std::string differential;
};

struct Calibration {
    FeatureRef feature_a = default_pump_feature();
    FeatureRef feature_b = default_repump_feature();
    double known_separation_hz = 0.0;  // |detuning(b) - detuning(a)|; 0 uses the table value
};

struct IngestOptions {
    std::size_t smoothing_window = 5;    // samples, odd
    double min_relative_height = 0.1;    // peak threshold relative to the largest peak
    double tolerance_hz = 5e6;           // peak-to-feature match distance when scoring
    double crossover_enhancement = 1.5;
};

/// Maps the scope's time axis to detuning with a line through the two
/// calibration features. The features are identified by trying each ordered
/// pair of detected differential peaks and keeping the pair whose implied map
/// lands the most other peaks on tabulated features.
/// Throws ParseError, NotFoundError (missing column or calibration feature) or
/// ValidationError (axis not strictly increasing).
SweepTrace ingest_scope_text(std::string_view text, const ColumnMap& columns, const Calibration& calibration,
                            const LineTable& table, const IngestOptions& options = {});
SweepTrace ingest_scope_csv(const std::filesystem::path& path, const ColumnMap& columns,
                            const Calibration& calibration, const LineTable& table,
                            const IngestOptions& options = {});

}  // namespace sas
