#include "sas/trace_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "sas/error.hpp"
#include "text_util.hpp"

namespace sas {

using detail::split;
using detail::split_lines;
using detail::to_double;
using detail::trim;

namespace {

constexpr std::string_view kTraceHeader = "detuning_hz,reference_v,probe_v,differential_v";
constexpr std::string_view kLogHeader = "t_s,detuning_hz,error_v,control_v,temperature_k,phase";

// "# key=value" -> (key, value); anything else -> empty key.
std::pair<std::string_view, std::string_view> meta_pair(std::string_view line) {
    line = trim(line.substr(1));
    auto eq = line.find('=');
    if (eq == std::string_view::npos) return {};
    return {trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

}  // namespace

void write_trace_csv(std::ostream& out, const SweepTrace& trace) {
    out << trace_csv(trace);
}

std::string trace_csv(const SweepTrace& trace) {
    trace.validate();
    fmt::memory_buffer buf;
    auto it = std::back_inserter(buf);
    fmt::format_to(it, "# format={}\n# seed={}\n# config_hash={}\n# samples_per_ramp={}\n{}\n", kTraceFormat,
                   trace.meta.noise_seed, trace.meta.config_hash, trace.meta.samples_per_ramp, kTraceHeader);
    for (std::size_t i = 0; i < trace.size(); ++i)
        fmt::format_to(it, "{},{},{},{}\n", trace.detuning_hz[i], trace.reference_v[i], trace.probe_v[i],
                       trace.differential_v[i]);
    return fmt::to_string(buf);
}

SweepTrace parse_trace_csv(std::string_view text) {
    SweepTrace t;
    bool format_seen = false, header_seen = false;
    std::size_t lineno = 0;
    for (auto raw : split_lines(text)) {
        ++lineno;
        auto line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto [key, value] = meta_pair(line);
            try {
                if (key == "format") {
                    if (value != kTraceFormat)
                        throw ParseError(fmt::format("unsupported trace format '{}'", value), lineno);
                    format_seen = true;
                } else if (key == "seed") {
                    t.meta.noise_seed = detail::to_u64(value);
                } else if (key == "config_hash") {
                    t.meta.config_hash = std::string(value);
                } else if (key == "samples_per_ramp") {
                    t.meta.samples_per_ramp = static_cast<std::size_t>(detail::to_u64(value));
                }
            } catch (const ParseError& e) {
                if (e.line()) throw;
                throw ParseError(e.what(), lineno);
            }
            continue;
        }
        if (!header_seen) {
            if (line != kTraceHeader) throw ParseError(fmt::format("expected header '{}'", kTraceHeader), lineno);
            header_seen = true;
            continue;
        }
        auto f = split(line, ',');
        if (f.size() != 4) throw ParseError(fmt::format("expected 4 fields, got {}", f.size()), lineno);
        try {
            t.detuning_hz.push_back(to_double(f[0]));
            t.reference_v.push_back(to_double(f[1]));
            t.probe_v.push_back(to_double(f[2]));
            t.differential_v.push_back(to_double(f[3]));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    if (!format_seen) throw ParseError(fmt::format("missing '# format={}' line", kTraceFormat));
    if (!header_seen) throw ParseError("missing column header");
    t.validate();
    return t;
}

void write_lock_log_csv(std::ostream& out, const TimeSeriesLog& log) { out << lock_log_csv(log); }

std::string lock_log_csv(const TimeSeriesLog& log) {
    fmt::memory_buffer buf;
    auto it = std::back_inserter(buf);
    fmt::format_to(it, "# format={}\n# seed={}\n# config_hash={}\n", kLockLogFormat, log.seed, log.config_hash);
    if (log.fault) fmt::format_to(it, "# fault={}\n", *log.fault);
    fmt::format_to(it, "{}\n", kLogHeader);
    for (std::size_t i = 0; i < log.size(); ++i)
        fmt::format_to(it, "{},{},{},{},{},{}\n", log.t_s[i], log.detuning_hz[i], log.error_v[i], log.control_v[i],
                       log.temperature_k[i], to_string(log.phase[i]));
    return fmt::to_string(buf);
}

TimeSeriesLog parse_lock_log_csv(std::string_view text) {
    TimeSeriesLog log;
    bool format_seen = false, header_seen = false;
    std::size_t lineno = 0;
    for (auto raw : split_lines(text)) {
        ++lineno;
        auto line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto [key, value] = meta_pair(line);
            if (key == "format") {
                if (value != kLockLogFormat)
                    throw ParseError(fmt::format("unsupported lock log format '{}'", value), lineno);
                format_seen = true;
            } else if (key == "seed") {
                log.seed = detail::to_u64(value);
            } else if (key == "config_hash") {
                log.config_hash = std::string(value);
            } else if (key == "fault") {
                log.fault = std::string(value);
            }
            continue;
        }
        if (!header_seen) {
            if (line != kLogHeader) throw ParseError(fmt::format("expected header '{}'", kLogHeader), lineno);
            header_seen = true;
            continue;
        }
        auto f = split(line, ',');
        if (f.size() != 6) throw ParseError(fmt::format("expected 6 fields, got {}", f.size()), lineno);
        try {
            log.t_s.push_back(to_double(f[0]));
            log.detuning_hz.push_back(to_double(f[1]));
            log.error_v.push_back(to_double(f[2]));
            log.control_v.push_back(to_double(f[3]));
            log.temperature_k.push_back(to_double(f[4]));
            log.phase.push_back(parse_lock_phase(trim(f[5])));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    if (!format_seen) throw ParseError(fmt::format("missing '# format={}' line", kLockLogFormat));
    if (!header_seen) throw ParseError("missing column header");
    return log;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

// --- Scope ingestion ----------------------------------------------------------

namespace {

struct ScopeColumns {
    std::vector<double> time, reference, probe, differential;
};

ScopeColumns parse_scope(std::string_view text, const ColumnMap& map) {
    ScopeColumns c;
    std::vector<std::string_view> names;
    std::size_t it = 0, ir = 0, ip = 0, id = 0;
    bool have_diff = !map.differential.empty();
    std::size_t lineno = 0;
    for (auto raw : split_lines(text)) {
        ++lineno;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto f = split(line, ',');
        if (names.empty()) {
            for (auto& name : f) names.push_back(trim(name));
            auto find = [&](const std::string& want) {
                auto pos = std::find(names.begin(), names.end(), want);
                if (pos == names.end()) throw NotFoundError(fmt::format("scope CSV has no column '{}'", want));
                return static_cast<std::size_t>(pos - names.begin());
            };
            it = find(map.time);
            ir = find(map.reference);
            ip = find(map.probe);
            if (have_diff) id = find(map.differential);
            continue;
        }
        if (f.size() != names.size())
            throw ParseError(fmt::format("expected {} fields, got {}", names.size(), f.size()), lineno);
        try {
            c.time.push_back(to_double(f[it]));
            c.reference.push_back(to_double(f[ir]));
            c.probe.push_back(to_double(f[ip]));
            c.differential.push_back(have_diff ? to_double(f[id]) : c.probe.back() - c.reference.back());
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    if (names.empty()) throw ParseError("scope CSV has no header");
    if (c.time.size() < 16) throw ValidationError("scope CSV needs at least 16 samples");
    for (std::size_t i = 1; i < c.time.size(); ++i)
        if (!(c.time[i] > c.time[i - 1]))
            throw ValidationError(fmt::format("time axis is not strictly increasing at sample {}", i));
    return c;
}

// Sub-sample peak positions (parabolic refinement) of local maxima.
std::vector<double> detect_peaks(const std::vector<double>& t, const std::vector<double>& y, std::size_t half,
                                 double min_relative_height) {
    const double top = *std::max_element(y.begin(), y.end());
    std::vector<double> out;
    if (!(top > 0.0)) return out;
    const double floor = min_relative_height * top;
    for (std::size_t i = half; i + half < y.size(); ++i) {
        if (y[i] < floor) continue;
        bool is_max = true;
        for (std::size_t j = i - half; j <= i + half && is_max; ++j)
            if (j != i && (y[j] > y[i] || (y[j] == y[i] && j < i))) is_max = false;
        if (!is_max) continue;
        const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
        double frac = denom < 0.0 ? 0.5 * (y[i - 1] - y[i + 1]) / denom : 0.0;
        frac = std::clamp(frac, -0.5, 0.5);
        const double dt = frac >= 0.0 ? t[i + 1] - t[i] : t[i] - t[i - 1];
        out.push_back(t[i] + frac * dt);
    }
    return out;
}

}  // namespace

SweepTrace ingest_scope_text(std::string_view text, const ColumnMap& columns, const Calibration& calibration,
                            const LineTable& table, const IngestOptions& options) {
    if (options.smoothing_window == 0 || options.smoothing_window % 2 == 0)
        throw ValidationError("ingest smoothing window must be odd");
    auto c = parse_scope(text, columns);

    const double da = find_feature(table, calibration.feature_a).detuning_hz;
    const double db = find_feature(table, calibration.feature_b).detuning_hz;
    double sep = calibration.known_separation_hz > 0.0 ? calibration.known_separation_hz : std::abs(db - da);
    if (!(sep > 0.0)) throw ValidationError("calibration features coincide");
    const double signed_sep = db >= da ? sep : -sep;

    const auto smooth = moving_average(c.differential, options.smoothing_window);
    const auto peaks = detect_peaks(c.time, smooth, std::max<std::size_t>(options.smoothing_window, 3),
                                    options.min_relative_height);
    if (peaks.size() < 2) throw NotFoundError("calibration features not found: fewer than two peaks in the trace");

    std::vector<double> targets;
    for (const auto& f : all_features(table, options.crossover_enhancement)) targets.push_back(f.detuning_hz);
    std::sort(targets.begin(), targets.end());
    auto matches = [&](double nu) {
        auto pos = std::lower_bound(targets.begin(), targets.end(), nu);
        double best = std::numeric_limits<double>::infinity();
        if (pos != targets.end()) best = *pos - nu;
        if (pos != targets.begin()) best = std::min(best, nu - *std::prev(pos));
        return best <= options.tolerance_hz;
    };

    int best_score = -1;
    double best_scale = 0.0, best_ta = 0.0;
    for (std::size_t i = 0; i < peaks.size(); ++i)
        for (std::size_t j = 0; j < peaks.size(); ++j) {
            if (i == j) continue;
            const double scale = signed_sep / (peaks[j] - peaks[i]);  // Hz per time unit
            int score = 0;
            for (double p : peaks) score += matches(da + (p - peaks[i]) * scale) ? 1 : 0;
            if (score > best_score) {
                best_score = score;
                best_scale = scale;
                best_ta = peaks[i];
            }
        }
    if (best_score < 3)
        throw NotFoundError(fmt::format("calibration features {} and {} not identifiable in the trace",
                                        calibration.feature_a.str(), calibration.feature_b.str()));

    SweepTrace out;
    out.detuning_hz.resize(c.time.size());
    for (std::size_t i = 0; i < c.time.size(); ++i) out.detuning_hz[i] = da + (c.time[i] - best_ta) * best_scale;
    out.reference_v = std::move(c.reference);
    out.probe_v = std::move(c.probe);
    out.differential_v = std::move(c.differential);
    if (best_scale < 0.0) {
        for (auto* v : {&out.detuning_hz, &out.reference_v, &out.probe_v, &out.differential_v})
            std::reverse(v->begin(), v->end());
    }
    out.meta.samples_per_ramp = out.size();
    out.validate();
    return out;
}

SweepTrace ingest_scope_csv(const std::filesystem::path& path, const ColumnMap& columns,
                            const Calibration& calibration, const LineTable& table, const IngestOptions& options) {
    return ingest_scope_text(read_file(path), columns, calibration, table, options);
}

}  // namespace sas
