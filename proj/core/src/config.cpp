#include "sas/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "sas/error.hpp"
#include "text_util.hpp"

namespace sas {

namespace {

struct Binding {
    std::string_view section;
    std::string_view key;
    std::function<void(std::string_view)> set;
    std::function<std::string()> get;
};

Binding num(std::string_view section, std::string_view key, double& v) {
    return {section, key, [&v](std::string_view s) { v = detail::to_double(s); }, [&v] { return fmt::format("{}", v); }};
}

Binding count(std::string_view section, std::string_view key, std::size_t& v) {
    return {section, key,
            [&v](std::string_view s) {
                auto u = detail::to_u64(s);
                v = static_cast<std::size_t>(u);
            },
            [&v] { return fmt::format("{}", v); }};
}

Binding flag(std::string_view section, std::string_view key, bool& v) {
    return {section, key, [&v](std::string_view s) { v = detail::to_bool(s); },
            [&v] { return std::string(v ? "true" : "false"); }};
}

Binding feature(std::string_view section, std::string_view key, FeatureRef& v) {
    return {section, key, [&v](std::string_view s) { v = FeatureRef::parse(detail::trim(s)); }, [&v] { return v.str(); }};
}

std::vector<Binding> bindings(ScenarioConfig& c, const std::filesystem::path& base_dir) {
    std::vector<Binding> b;
    b.push_back({"lines", "path",
                 [&c, base_dir](std::string_view s) {
                     std::filesystem::path p{std::string(detail::trim(s))};
                     c.line_data = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
                 },
                 [&c] { return c.line_data.generic_string(); }});

    b.push_back(num("medium", "temperature_k", c.medium.temperature_k));
    b.push_back(num("medium", "peak_optical_depth", c.medium.peak_optical_depth));
    b.push_back(num("medium", "saturation_s", c.medium.saturation_s));
    b.push_back(num("medium", "crossover_enhancement", c.medium.crossover_enhancement));
    b.push_back(num("medium", "dip_contrast", c.medium.dip_contrast));

    b.push_back(num("sweep", "start_hz", c.sweep.start_hz));
    b.push_back(num("sweep", "stop_hz", c.sweep.stop_hz));
    b.push_back(count("sweep", "samples", c.sweep.samples));

    b.push_back(flag("noise", "enabled", c.noise.enabled));
    b.push_back(num("noise", "sigma_v", c.noise.sigma_v));

    b.push_back(num("plant", "k_current", c.plant.k_current));
    b.push_back(num("plant", "k_temp", c.plant.k_temp));
    b.push_back(num("plant", "k_ctrl", c.plant.k_ctrl));
    b.push_back(num("plant", "linewidth", c.plant.linewidth));
    b.push_back(num("plant", "mode_hop_span", c.plant.mode_hop_span));
    b.push_back(num("plant", "drift_rate", c.plant.drift_rate));
    b.push_back(num("plant", "base_detuning", c.plant.base_detuning));
    b.push_back(num("plant", "bias_current", c.plant.bias_current));
    b.push_back(num("plant", "reference_temperature", c.plant.reference_temperature));
    b.push_back(num("plant", "thermal_tau", c.plant.thermal_tau));

    b.push_back(num("ramp", "frequency", c.ramp.frequency));
    b.push_back(num("ramp", "span", c.ramp.span));
    b.push_back({"ramp", "shape", [&c](std::string_view s) { c.ramp.shape = parse_ramp_shape(detail::trim(s)); },
                 [&c] { return std::string(to_string(c.ramp.shape)); }});
    b.push_back(flag("ramp", "enabled", c.ramp.enabled));

    b.push_back(num("pid", "kp", c.pid.kp));
    b.push_back(num("pid", "ki", c.pid.ki));
    b.push_back(num("pid", "kd", c.pid.kd));
    b.push_back(num("pid", "offset", c.pid.offset));
    b.push_back(num("pid", "output_min", c.pid.output_min));
    b.push_back(num("pid", "output_max", c.pid.output_max));
    b.push_back(count("pid", "derivative_smoothing", c.pid.derivative_smoothing));

    b.push_back(feature("servo", "target", c.servo.target));
    b.push_back({"servo", "mode", [&c](std::string_view s) { c.servo.mode = parse_error_mode(detail::trim(s)); },
                 [&c] { return std::string(to_string(c.servo.mode)); }});
    b.push_back(count("servo", "smoothing_window", c.servo.smoothing_window));
    b.push_back(num("servo", "derivative_scale_hz", c.servo.derivative_scale_hz));
    b.push_back(num("servo", "search_halfwidth_hz", c.servo.search_halfwidth_hz));
    b.push_back(num("servo", "min_feature_amplitude", c.servo.min_feature_amplitude));
    b.push_back(num("servo", "input_filter_tau", c.servo.input_filter_tau));
    b.push_back(num("servo", "detector_tau", c.servo.detector_tau));
    b.push_back(num("servo", "lock_threshold", c.servo.lock_threshold));
    b.push_back(num("servo", "hold_time", c.servo.hold_time));
    b.push_back(num("servo", "loss_threshold", c.servo.loss_threshold));
    b.push_back(num("servo", "loss_time", c.servo.loss_time));
    b.push_back(num("servo", "min_level_fraction", c.servo.min_level_fraction));
    b.push_back(num("servo", "relock_delay", c.servo.relock_delay));
    b.push_back(num("servo", "sweep_time", c.servo.sweep_time));
    b.push_back(flag("servo", "invert_polarity", c.servo.invert_polarity));

    b.push_back(num("markers", "window_lo_hz", c.markers.window.lo));
    b.push_back(num("markers", "window_hi_hz", c.markers.window.hi));
    b.push_back({"markers", "hyperfine",
                 [&c](std::string_view s) {
                     c.markers.selection.hyperfine.clear();
                     for (auto part : detail::split(s, ','))
                         if (!detail::trim(part).empty())
                             c.markers.selection.hyperfine.push_back(FeatureRef::parse(detail::trim(part)));
                 },
                 [&c] {
                     std::string out;
                     for (const auto& f : c.markers.selection.hyperfine) out += (out.empty() ? "" : ", ") + f.str();
                     return out;
                 }});
    b.push_back(feature("markers", "crossover", c.markers.selection.crossover));

    b.push_back(num("readout", "halfspan_hz", c.readout.halfspan_hz));
    b.push_back(num("readout", "step_hz", c.readout.step_hz));

    b.push_back(num("lock", "duration_s", c.lock.duration_s));
    b.push_back(num("lock", "dt_s", c.lock.dt_s));
    b.push_back(count("lock", "log_every", c.lock.log_every));
    b.push_back(num("lock", "settle_s", c.lock.settle_s));
    b.push_back(num("lock", "ramp_test_s", c.lock.ramp_test_s));

    b.push_back(num("temp_step", "step_k", c.temp_step.step_k));
    b.push_back(num("temp_step", "step_time_s", c.temp_step.step_time_s));
    b.push_back(num("temp_step", "settle_s", c.temp_step.settle_s));
    b.push_back(num("temp_step", "dt_s", c.temp_step.dt_s));
    b.push_back(count("temp_step", "log_every", c.temp_step.log_every));
    b.push_back(num("temp_step", "average_s", c.temp_step.average_s));
    b.push_back(num("temp_step", "band_hz", c.temp_step.band_hz));

    b.push_back(num("fluorescence", "low_detuning_fwhm", c.fluorescence.low_detuning_fwhm));
    b.push_back(num("fluorescence", "large_detuning_fwhm", c.fluorescence.large_detuning_fwhm));

    b.push_back(feature("pump_repump", "pump", c.pump_repump.pump));
    b.push_back(feature("pump_repump", "repump", c.pump_repump.repump));

    b.push_back({"run", "seed", [&c](std::string_view s) { c.seed = detail::to_u64(s); },
                 [&c] { return fmt::format("{}", c.seed); }});
    return b;
}

template <class F>
void checked(std::string_view what, F&& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        throw ConfigError(fmt::format("[{}] {}", what, e.what()));
    }
}

}  // namespace

void ScenarioConfig::validate() const {
    if (line_data.empty()) throw ConfigError("[lines] path is required");
    checked("medium", [&] { medium.validate(); });
    if (!(sweep.start_hz < sweep.stop_hz)) throw ConfigError("[sweep] start_hz must be below stop_hz");
    if (sweep.samples < 16) throw ConfigError("[sweep] samples must be >= 16");
    if (!(noise.sigma_v >= 0.0)) throw ConfigError("[noise] sigma_v must be non-negative");
    checked("plant", [&] { plant.validate(); });
    checked("ramp", [&] { ramp.validate(); });
    checked("pid", [&] { pid.validate(); });
    checked("servo", [&] { servo.validate(); });
    if (!(markers.window.lo < markers.window.hi)) throw ConfigError("[markers] window_lo_hz must be below window_hi_hz");
    if (markers.selection.hyperfine.empty()) throw ConfigError("[markers] hyperfine needs at least one feature");
    if (!(readout.step_hz > 0.0) || !(readout.halfspan_hz > 10.0 * readout.step_hz))
        throw ConfigError("[readout] needs step_hz > 0 and halfspan_hz > 10 step_hz");
    if (!(lock.duration_s > 0.0) || !(lock.dt_s > 0.0) || lock.dt_s > lock.duration_s || lock.log_every == 0)
        throw ConfigError("[lock] needs duration_s >= dt_s > 0 and log_every >= 1");
    if (!(lock.settle_s >= 0.0) || !(lock.ramp_test_s >= 0.0) || lock.ramp_test_s >= lock.duration_s)
        throw ConfigError("[lock] settle_s and ramp_test_s must be non-negative, ramp_test_s < duration_s");
    if (!(temp_step.dt_s > 0.0) || !(temp_step.step_time_s > 0.0) || !(temp_step.settle_s > 0.0) ||
        temp_step.log_every == 0)
        throw ConfigError("[temp_step] times must be positive and log_every >= 1");
    if (!(temp_step.average_s > 0.0) || temp_step.average_s > temp_step.settle_s ||
        temp_step.average_s > temp_step.step_time_s)
        throw ConfigError("[temp_step] average_s must be positive and fit before and after the step");
    if (!(temp_step.band_hz > 0.0)) throw ConfigError("[temp_step] band_hz must be positive");
    if (!std::isfinite(temp_step.step_k)) throw ConfigError("[temp_step] step_k must be finite");
    if (!(fluorescence.low_detuning_fwhm > 0.0) || !(fluorescence.large_detuning_fwhm > fluorescence.low_detuning_fwhm))
        throw ConfigError("[fluorescence] needs 0 < low_detuning_fwhm < large_detuning_fwhm");
}

ScenarioConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    ScenarioConfig cfg;
    auto table = bindings(cfg, base_dir);

    std::string section;
    std::set<std::string> seen;
    bool header = false;
    std::size_t lineno = 0;
    for (auto raw : detail::split_lines(text)) {
        ++lineno;
        auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line.starts_with("format=") && line != kConfigFormat)
                throw ConfigError(fmt::format("unsupported config version '{}' (line {})", line.substr(7), lineno));
            if (line != kConfigFormat)
                throw ConfigError(fmt::format("missing '{}' header (line {})", kConfigFormat, lineno));
            header = true;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(fmt::format("malformed section header (line {})", lineno));
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            bool known = false;
            for (const auto& b : table) known = known || b.section == section;
            if (!known) throw ConfigError(fmt::format("unknown section [{}] (line {})", section, lineno));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(fmt::format("expected key = value (line {})", lineno));
        if (section.empty()) throw ConfigError(fmt::format("key outside any section (line {})", lineno));
        auto key = detail::trim(line.substr(0, eq));
        auto value = detail::trim(line.substr(eq + 1));
        auto it = std::find_if(table.begin(), table.end(),
                               [&](const Binding& b) { return b.section == section && b.key == key; });
        if (it == table.end()) throw ConfigError(fmt::format("unknown key {}.{} (line {})", section, key, lineno));
        if (!seen.insert(section + "." + std::string(key)).second)
            throw ConfigError(fmt::format("duplicate key {}.{} (line {})", section, key, lineno));
        try {
            it->set(value);
        } catch (const Error& e) {
            throw ConfigError(fmt::format("bad value for {}.{}: {} (line {})", section, key, e.what(), lineno));
        }
    }
    if (!header) throw ConfigError(fmt::format("missing '{}' header", kConfigFormat));
    cfg.noise.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

namespace {

std::string serialize(const ScenarioConfig& cfg, bool for_hash) {
    ScenarioConfig copy = cfg;
    auto table = bindings(copy, {});
    std::string out = std::string(kConfigFormat) + "\n";
    std::string_view section;
    for (const auto& b : table) {
        if (for_hash && (b.section == "run" || b.section == "lines")) continue;
        if (b.section != section) {
            section = b.section;
            out += fmt::format("\n[{}]\n", section);
        }
        out += fmt::format("{} = {}\n", b.key, b.get());
    }
    return out;
}

}  // namespace

std::string serialize_config(const ScenarioConfig& cfg) { return serialize(cfg, false); }

std::string config_hash(const ScenarioConfig& cfg) {
    return fmt::format("{:016x}", detail::fnv1a(serialize(cfg, true)));
}

}  // namespace sas
