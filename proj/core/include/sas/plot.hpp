#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "sas/atomic_data.hpp"
#include "sas/closed_loop.hpp"
#include "sas/spectrum.hpp"

namespace sas {

/// Standalone SVG, one polyline per channel (reference, probe, differential),
/// detuning in MHz on x, with a tick and label for each annotated feature in range.
/// Byte-identical for identical input. Throws ValidationError for an empty trace.
std::string render_trace_svg(const SweepTrace& trace, std::span<const TransitionLine> annotations = {},
                             std::string_view title = "");

/// Two stacked panels over time: conditioned error and control voltage.
std::string render_log_svg(const TimeSeriesLog& log, std::string_view title = "");

/// Render and write; throws Error when the path is unwritable.
void emit_plot(const SweepTrace& trace, const std::filesystem::path& path,
               std::span<const TransitionLine> annotations = {}, std::string_view title = "");
void emit_plot(const TimeSeriesLog& log, const std::filesystem::path& path, std::string_view title = "");

}  // namespace sas
