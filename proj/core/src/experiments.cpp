#include "sas/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "sas/error.hpp"
#include "sas/lineshape.hpp"
#include "sas/plot.hpp"

namespace sas {

bool ExperimentReport::passed() const {
    return !criteria.empty() &&
           std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
}

const Quantity* ExperimentReport::value(std::string_view name) const {
    auto it = std::find_if(values.begin(), values.end(), [&](const Quantity& q) { return q.name == name; });
    return it == values.end() ? nullptr : &*it;
}

const CriterionResult* ExperimentReport::criterion(std::string_view name) const {
    auto it = std::find_if(criteria.begin(), criteria.end(), [&](const CriterionResult& c) { return c.name == name; });
    return it == criteria.end() ? nullptr : &*it;
}

double fluorescence_proxy(double delta_hz, double doppler_fwhm_hz) {
    if (!(doppler_fwhm_hz > 0.0)) throw ValidationError("fluorescence proxy needs a positive Doppler width");
    return doppler_gaussian_unit_peak(delta_hz, GaussianParams{0.0, doppler_fwhm_hz});
}

namespace {

// Creates <dir>/<name>/ and returns the relative artifact prefix, or nothing
// when no output was requested.
std::optional<std::filesystem::path> artifact_dir(const OutputSpec& out, std::string_view name) {
    if (out.dir.empty()) return std::nullopt;
    auto dir = out.dir / std::string(name);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(fmt::format("cannot create output directory '{}': {}", dir.string(), ec.message()));
    return std::filesystem::path(std::string(name));
}

void save(ExperimentReport& r, const OutputSpec& out, const std::filesystem::path& rel, std::string_view bytes) {
    write_file(out.dir / rel, bytes);
    r.artifacts.push_back(rel.generic_string());
}

ExperimentReport start_report(std::string_view name, const ScenarioConfig& cfg) {
    ExperimentReport r;
    r.experiment = std::string(name);
    r.seed = cfg.seed;
    r.config_hash = config_hash(cfg);
    return r;
}

void add(ExperimentReport& r, std::string name, double value, std::string unit) {
    r.values.push_back({std::move(name), value, std::move(unit)});
}

void check(ExperimentReport& r, std::string name, bool passed, double measured, std::string unit,
           std::string requirement) {
    r.criteria.push_back({std::move(name), passed, measured, std::move(unit), std::move(requirement)});
}

double mean_of(std::span<const double> v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Indices [first, last) of samples with lo <= t < hi.
std::pair<std::size_t, std::size_t> time_range(const std::vector<double>& t, double lo, double hi) {
    auto a = std::lower_bound(t.begin(), t.end(), lo);
    auto b = std::lower_bound(t.begin(), t.end(), hi);
    return {static_cast<std::size_t>(a - t.begin()), static_cast<std::size_t>(b - t.begin())};
}

std::string phase_history(const TimeSeriesLog& log) {
    std::string out;
    for (std::size_t i = 1; i < log.size(); ++i)
        if (log.phase[i] != log.phase[i - 1])
            out += fmt::format("{}t={:.6g}s {}->{}", out.empty() ? "" : "; ", log.t_s[i], to_string(log.phase[i - 1]),
                               to_string(log.phase[i]));
    return out.empty() ? std::string("no phase changes") : out;
}

}  // namespace

// --- sweep -----------------------------------------------------------------------

ExperimentReport run_sweep_experiment(const ScenarioConfig& cfg, const OutputSpec& out) {
    auto r = start_report("sweep", cfg);
    const auto table = load_line_data(cfg.line_data);
    const SpectrumModel model(table, cfg.medium);

    NoiseConfig noise = cfg.noise;
    noise.seed = cfg.seed;
    auto trace = synthesize_sweep(model, cfg.sweep, noise);
    trace.meta.config_hash = r.config_hash;

    add(r, "doppler_fwhm_rb87", model.doppler_fwhm_hz(IsotopeId::Rb87), "Hz");
    add(r, "doppler_fwhm_rb85", model.doppler_fwhm_hz(IsotopeId::Rb85), "Hz");
    add(r, "dip_fwhm", model.dip_fwhm_hz(), "Hz");

    const DepthThresholds standard;
    try {
        const auto m = extract_markers(trace, table, cfg.markers.window, cfg.markers.selection,
                                       default_marker_options(model));
        const auto d = depth_metrics(m);
        add(r, "marker_a", m.a, "V");
        add(r, "marker_b", m.b, "V");
        add(r, "marker_c", m.c, "V");
        add(r, "marker_d", m.d, "V");
        check(r, "doppler_depth", d.doppler_depth > standard.doppler, d.doppler_depth, "%",
              fmt::format("> {}", standard.doppler));
        check(r, "hyperfine_depth", d.hyperfine_depth > standard.hyperfine, d.hyperfine_depth, "%",
              fmt::format("> {}", standard.hyperfine));
        check(r, "crossover_depth", d.crossover_depth > standard.crossover, d.crossover_depth, "%",
              fmt::format("> {}", standard.crossover));
    } catch (const NoFeaturesError& e) {
        r.notes.push_back(fmt::format("no sub-Doppler features: {}", e.what()));
        for (auto [name, bound] : {std::pair{"doppler_depth", standard.doppler},
                                   std::pair{"hyperfine_depth", standard.hyperfine},
                                   std::pair{"crossover_depth", standard.crossover}})
            check(r, name, false, 0.0, "%", fmt::format("> {}", bound));
    }

    // Census on a clean, finely sampled copy of the marker window.
    const auto& w = cfg.markers.window;
    const auto n = static_cast<std::size_t>(std::llround((w.hi - w.lo) / 0.1e6)) + 1;
    const auto clean = synthesize_sweep(model, SweepSpec{w.lo, w.hi, n}, NoiseConfig{false, 0.0, 0});
    const auto extrema = count_sub_doppler_extrema(clean, w);
    std::size_t expected = 0;
    for (const auto& f : all_features(table, cfg.medium.crossover_enhancement))
        if (w.contains(f.detuning_hz)) ++expected;
    check(r, "feature_census", extrema == expected, static_cast<double>(extrema), "extrema", fmt::format("== {}", expected));

    const double sep = pump_repump_separation(table, cfg.pump_repump.pump, cfg.pump_repump.repump);
    check(r, "pump_repump_separation", sep >= 6.4e9 && sep <= 6.7e9, sep, "Hz", "in [6.4e9, 6.7e9]");

    if (auto rel = artifact_dir(out, "sweep")) {
        save(r, out, *rel / "sweep.csv", trace_csv(trace));
        const auto features = all_features(table, cfg.medium.crossover_enhancement);
        save(r, out, *rel / "sweep.svg", render_trace_svg(trace, features, "saturated absorption sweep"));
    }
    return r;
}

// --- lock ------------------------------------------------------------------------

ExperimentReport run_lock_experiment(const ScenarioConfig& cfg, const OutputSpec& out) {
    auto r = start_report("lock", cfg);
    const auto table = load_line_data(cfg.line_data);
    const SpectrumModel model(table, cfg.medium);
    const ErrorReadout readout(model, cfg.servo, cfg.readout.halfspan_hz, cfg.readout.step_hz);
    const auto& point = readout.lock_point();

    Scenario sc;
    sc.duration_s = cfg.lock.duration_s;
    sc.dt_s = cfg.lock.dt_s;
    sc.log_every = cfg.lock.log_every;
    const double ramp_from = cfg.lock.duration_s - cfg.lock.ramp_test_s;
    if (cfg.lock.ramp_test_s > 0.0) sc.ramp_while_locked_from_s = ramp_from;
    auto log = closed_loop_run(cfg.loop(), readout, sc, cfg.seed);
    log.config_hash = r.config_hash;

    add(r, "lock_point_detuning", point.detuning_hz, "Hz");
    add(r, "feature_amplitude", point.feature_amplitude, "V");
    r.notes.push_back(phase_history(log));
    if (log.fault) r.notes.push_back(*log.fault);

    // Pre-lock peak of the conditioned error while the ramp sweeps across the feature.
    double pre_peak = 0.0;
    std::size_t i = 0;
    for (; i < log.size() && log.phase[i] == LockPhase::Sweeping; ++i) pre_peak = std::max(pre_peak, std::abs(log.error_v[i]));
    add(r, "pre_lock_error_peak", pre_peak, "V");

    auto first_locked = std::find(log.phase.begin(), log.phase.end(), LockPhase::Locked);
    const bool ever_locked = first_locked != log.phase.end();
    const std::size_t at_ramp = time_range(log.t_s, ramp_from, ramp_from).first;
    const bool locked_before_ramp = at_ramp > 0 && log.phase[std::min(at_ramp, log.size()) - 1] == LockPhase::Locked;
    check(r, "reaches_locked", ever_locked && locked_before_ramp, ever_locked ? 1.0 : 0.0, "", "phase == locked");

    double rms_pct = std::numeric_limits<double>::infinity(), pp_pct = std::numeric_limits<double>::infinity();
    if (ever_locked) {
        const double t_lock = log.t_s[static_cast<std::size_t>(first_locked - log.phase.begin())];
        add(r, "lock_acquired_at", t_lock, "s");
        auto [a, b] = time_range(log.t_s, t_lock + cfg.lock.settle_s, ramp_from);
        if (b > a) {
            double sq = 0.0, dsq = 0.0;
            bool stayed = true;
            for (std::size_t k = a; k < b; ++k) {
                sq += log.error_v[k] * log.error_v[k];
                const double dd = log.detuning_hz[k] - point.detuning_hz;
                dsq += dd * dd;
                stayed = stayed && log.phase[k] == LockPhase::Locked;
            }
            const double rms = std::sqrt(sq / static_cast<double>(b - a));
            auto [cmin, cmax] = std::minmax_element(log.control_v.begin() + static_cast<std::ptrdiff_t>(a),
                                                    log.control_v.begin() + static_cast<std::ptrdiff_t>(b));
            const double pp = *cmax - *cmin;
            const double full_scale = cfg.pid.output_max - cfg.pid.output_min;
            rms_pct = pre_peak > 0.0 ? 100.0 * rms / pre_peak : rms_pct;
            pp_pct = 100.0 * pp / full_scale;
            add(r, "hold_window", log.t_s[b - 1] - log.t_s[a], "s");
            add(r, "post_lock_rms_error", rms, "V");
            add(r, "post_lock_detuning_rms", std::sqrt(dsq / static_cast<double>(b - a)), "Hz");
            add(r, "post_lock_control_mean", mean_of(std::span(log.control_v).subspan(a, b - a)), "V");
            add(r, "post_lock_control_pp", pp, "V");
            if (!stayed) r.notes.push_back("lock dropped inside the hold window");
            if (!stayed) rms_pct = pp_pct = std::numeric_limits<double>::infinity();
        }
    }
    check(r, "post_lock_rms_error", rms_pct < 2.0, std::isfinite(rms_pct) ? rms_pct : -1.0, "% of pre-lock peak", "< 2");
    check(r, "control_peak_to_peak", pp_pct < 1.0, std::isfinite(pp_pct) ? pp_pct : -1.0, "% of full scale", "< 1");

    if (sc.ramp_while_locked_from_s) {
        auto [a, b] = time_range(log.t_s, ramp_from, cfg.lock.duration_s + sc.dt_s);
        double peak = 0.0;
        bool held = b > a;
        for (std::size_t k = a; k < b; ++k) {
            peak = std::max(peak, std::abs(log.error_v[k]));
            held = held && log.phase[k] == LockPhase::Locked;
        }
        const double pct = pre_peak > 0.0 ? 100.0 * peak / pre_peak : 0.0;
        add(r, "ramp_test_error_peak", peak, "V");
        check(r, "ramp_rejection", held, pct, "% of pre-lock peak", "stays locked");
    }

    if (auto rel = artifact_dir(out, "lock")) {
        save(r, out, *rel / "lock_log.csv", lock_log_csv(log));
        save(r, out, *rel / "lock.svg", render_log_svg(log, "lock acquisition"));
    }
    return r;
}

// --- temperature step ----------------------------------------------------------------

namespace {

struct StepOutcome {
    bool locked_before = false;
    bool locked_after = false;
    double delta_control = 0.0;
    double max_excursion = 0.0;
    double resettle_time = 0.0;
    bool resettled = false;
    TimeSeriesLog log;
};

StepOutcome run_step(const ScenarioConfig& cfg, const ErrorReadout& readout, double step_k) {
    const auto& ts = cfg.temp_step;
    Scenario sc;
    sc.duration_s = ts.step_time_s + ts.settle_s;
    sc.dt_s = ts.dt_s;
    sc.log_every = ts.log_every;
    sc.temp_steps = {TempStep{ts.step_time_s, step_k}};

    StepOutcome o;
    o.log = closed_loop_run(cfg.loop(), readout, sc, cfg.seed);
    const auto& log = o.log;
    const double lock_point = readout.lock_point().detuning_hz;

    auto [b0, b1] = time_range(log.t_s, ts.step_time_s - ts.average_s, ts.step_time_s);
    auto [a0, a1] = time_range(log.t_s, sc.duration_s - ts.average_s, sc.duration_s + sc.dt_s);
    o.locked_before = b1 > b0 && std::all_of(log.phase.begin() + static_cast<std::ptrdiff_t>(b0),
                                             log.phase.begin() + static_cast<std::ptrdiff_t>(b1),
                                             [](LockPhase p) { return p == LockPhase::Locked; });
    const std::size_t step_index = b1;
    o.locked_after = !log.fault && step_index < log.size() &&
                     std::all_of(log.phase.begin() + static_cast<std::ptrdiff_t>(step_index), log.phase.end(),
                                 [](LockPhase p) { return p == LockPhase::Locked; });
    const std::span<const double> control(log.control_v);
    if (b1 > b0 && a1 > a0) o.delta_control = mean_of(control.subspan(a0, a1 - a0)) - mean_of(control.subspan(b0, b1 - b0));

    // Detuning averaged over ~1 ms so single white-noise samples do not count as excursions.
    const double log_dt = ts.dt_s * static_cast<double>(ts.log_every);
    std::size_t win = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(1e-3 / log_dt)));
    if (win % 2 == 0) ++win;
    if (log.size() > win && step_index < log.size()) {
        const auto avg = moving_average(log.detuning_hz, win);
        double last_out = -1.0;
        for (std::size_t k = step_index; k < log.size(); ++k) {
            const double dev = std::abs(avg[k] - lock_point);
            o.max_excursion = std::max(o.max_excursion, dev);
            if (dev > ts.band_hz) last_out = log.t_s[k];
        }
        o.resettle_time = last_out < 0.0 ? 0.0 : last_out - ts.step_time_s;
        o.resettled = last_out < sc.duration_s - ts.average_s;
    }
    return o;
}

}  // namespace

ExperimentReport run_temp_step_experiment(const ScenarioConfig& cfg, const OutputSpec& out) {
    auto r = start_report("temp-step", cfg);
    const auto table = load_line_data(cfg.line_data);
    const SpectrumModel model(table, cfg.medium);
    const ErrorReadout readout(model, cfg.servo, cfg.readout.halfspan_hz, cfg.readout.step_hz);
    add(r, "lock_point_detuning", readout.lock_point().detuning_hz, "Hz");

    const auto rel = artifact_dir(out, "temp-step");
    const double step = cfg.temp_step.step_k;
    const double sign_steps[] = {step, -step};
    for (int k = 0; k < (step == 0.0 ? 1 : 2); ++k) {
        const double s = sign_steps[k];
        const std::string tag = k == 0 ? "step" : "mirror";
        const auto o = run_step(cfg, readout, s);
        const double expected = -cfg.plant.k_temp * s / cfg.plant.control_gain();
        const double tol = std::max(0.02 * std::abs(expected), 0.01);

        add(r, tag + "_k", s, "K");
        add(r, tag + "_expected_delta_control", expected, "V");
        add(r, tag + "_max_excursion", o.max_excursion, "Hz");
        add(r, tag + "_resettle_time", o.resettle_time, "s");
        r.notes.push_back(fmt::format("{}: {}", tag, phase_history(o.log)));
        if (o.log.fault) r.notes.push_back(fmt::format("{}: {}", tag, *o.log.fault));

        check(r, tag + "_locked_before", o.locked_before, o.locked_before ? 1.0 : 0.0, "", "locked before the step");
        check(r, tag + "_stays_locked", o.locked_after, o.locked_after ? 1.0 : 0.0, "", "locked after the step");
        check(r, tag + "_delta_control", std::abs(o.delta_control - expected) <= tol, o.delta_control, "V",
              fmt::format("{:.4g} +- {:.4g}", expected, tol));
        check(r, tag + "_resettle", o.resettled, o.max_excursion, "Hz",
              fmt::format("within +-{} Hz of the lock point", cfg.temp_step.band_hz));

        if (rel) {
            auto log = o.log;
            log.config_hash = r.config_hash;
            save(r, out, *rel / (tag + "_log.csv"), lock_log_csv(log));
            save(r, out, *rel / (tag + ".svg"), render_log_svg(log, fmt::format("temperature step {} K", s)));
        }
    }
    return r;
}

// --- fluorescence --------------------------------------------------------------------

ExperimentReport run_fluorescence_experiment(const ScenarioConfig& cfg, const OutputSpec& out) {
    auto r = start_report("fluorescence", cfg);
    const auto table = load_line_data(cfg.line_data);
    const SpectrumModel model(table, cfg.medium);
    const ErrorReadout readout(model, cfg.servo, cfg.readout.halfspan_hz, cfg.readout.step_hz);
    const auto target = find_feature(table, cfg.servo.target);
    const double fwhm = model.doppler_fwhm_hz(target.isotope);

    Scenario sc;
    sc.duration_s = 0.1;
    sc.dt_s = cfg.lock.dt_s;
    sc.start_locked = true;
    sc.log_every = cfg.lock.log_every;
    const auto log = closed_loop_run(cfg.loop(), readout, sc, cfg.seed);
    auto [a, b] = time_range(log.t_s, 0.5 * sc.duration_s, sc.duration_s + sc.dt_s);
    const double delta_locked = mean_of(std::span(log.detuning_hz).subspan(a, b - a)) - target.detuning_hz;

    const double low = cfg.fluorescence.low_detuning_fwhm * fwhm;
    const double large = cfg.fluorescence.large_detuning_fwhm * fwhm;
    const double f_locked = fluorescence_proxy(delta_locked, fwhm);
    const double f_low = fluorescence_proxy(low, fwhm);
    const double f_large = fluorescence_proxy(large, fwhm);

    add(r, "doppler_fwhm", fwhm, "Hz");
    add(r, "locked_detuning_offset", delta_locked, "Hz");
    add(r, "low_detuning", low, "Hz");
    add(r, "large_detuning", large, "Hz");
    add(r, "brightness_locked", f_locked, "");
    add(r, "brightness_low", f_low, "");
    add(r, "brightness_large", f_large, "");

    // Strict decrease with |delta| on both sides of the line.
    constexpr int kGrid = 200;
    bool decreasing = true;
    std::string table_csv = "delta_hz,brightness\n";
    double prev = 2.0;
    for (int k = 0; k <= kGrid; ++k) {
        const double d = 5.0 * fwhm * k / kGrid;
        const double f = fluorescence_proxy(d, fwhm);
        decreasing = decreasing && f < prev && fluorescence_proxy(-d, fwhm) == f;
        prev = f;
    }
    for (int k = -kGrid; k <= kGrid; ++k) {
        const double d = 5.0 * fwhm * k / kGrid;
        table_csv += fmt::format("{},{}\n", d, fluorescence_proxy(d, fwhm));
    }

    check(r, "locked_brightness", f_locked >= 0.99, f_locked, "", ">= 0.99");
    check(r, "monotone_decrease", decreasing, decreasing ? 1.0 : 0.0, "", "strictly decreasing in |delta|");
    if (cfg.fluorescence.low_detuning_fwhm == 0.5)
        check(r, "half_width_brightness", std::abs(f_low - 0.5) <= 0.005, f_low, "", "0.5 +- 1%");
    if (cfg.fluorescence.large_detuning_fwhm == 3.0)
        check(r, "large_detuning_brightness", f_large < 1e-10, f_large, "", "< 1e-10");

    if (auto rel = artifact_dir(out, "fluorescence")) save(r, out, *rel / "fluorescence.csv", table_csv);
    return r;
}

// --- analyze -------------------------------------------------------------------------

ExperimentReport run_analyze(const std::filesystem::path& csv, const ScenarioConfig& cfg,
                             const AnalyzeOptions& options, const OutputSpec& out) {
    auto r = start_report("analyze", cfg);
    const auto table = load_line_data(cfg.line_data);
    const SpectrumModel model(table, cfg.medium);
    const auto text = read_file(csv);

    SweepTrace trace;
    if (text.find(fmt::format("# format={}", kTraceFormat)) != std::string::npos) {
        trace = parse_trace_csv(text);
        r.notes.push_back("input: saved sweep trace");
    } else {
        IngestOptions io;
        io.crossover_enhancement = cfg.medium.crossover_enhancement;
        trace = ingest_scope_text(text, options.columns, options.calibration, table, io);
        r.notes.push_back("input: scope export, axis calibrated on " + options.calibration.feature_a.str() + " and " +
                          options.calibration.feature_b.str());
        add(r, "calibrated_start", trace.detuning_hz.front(), "Hz");
        add(r, "calibrated_stop", trace.detuning_hz.back(), "Hz");
    }
    add(r, "samples", static_cast<double>(trace.size()), "");

    const DepthThresholds standard;
    try {
        const auto m = extract_markers(trace, table, cfg.markers.window, cfg.markers.selection,
                                       default_marker_options(model));
        const auto d = depth_metrics(m);
        add(r, "marker_a", m.a, "V");
        add(r, "marker_b", m.b, "V");
        add(r, "marker_c", m.c, "V");
        add(r, "marker_d", m.d, "V");
        check(r, "doppler_depth", d.doppler_depth > standard.doppler, d.doppler_depth, "%",
              fmt::format("> {}", standard.doppler));
        check(r, "hyperfine_depth", d.hyperfine_depth > standard.hyperfine, d.hyperfine_depth, "%",
              fmt::format("> {}", standard.hyperfine));
        check(r, "crossover_depth", d.crossover_depth > standard.crossover, d.crossover_depth, "%",
              fmt::format("> {}", standard.crossover));
    } catch (const NoFeaturesError& e) {
        r.notes.push_back(fmt::format("no sub-Doppler features: {}", e.what()));
        check(r, "sub_doppler_features", false, 0.0, "", "present");
    }

    if (auto rel = artifact_dir(out, "analyze"))
        save(r, out, *rel / "analyzed.svg",
             render_trace_svg(trace, all_features(table, cfg.medium.crossover_enhancement), "analyzed trace"));
    return r;
}

// --- serialization -------------------------------------------------------------------

std::string report_json(const ExperimentReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["format"] = kReportFormat;
    j["experiment"] = report.experiment;
    j["seed"] = report.seed;
    j["config_hash"] = report.config_hash;
    j["passed"] = report.passed();
    j["criteria"] = ordered_json::array();
    for (const auto& c : report.criteria)
        j["criteria"].push_back({{"name", c.name},
                                 {"passed", c.passed},
                                 {"measured", c.measured},
                                 {"unit", c.unit},
                                 {"requirement", c.requirement}});
    j["values"] = ordered_json::array();
    for (const auto& q : report.values) j["values"].push_back({{"name", q.name}, {"value", q.value}, {"unit", q.unit}});
    j["artifacts"] = report.artifacts;
    j["notes"] = report.notes;
    return j.dump(2) + "\n";
}

std::string report_csv(const ExperimentReport& report) {
    auto quote = [](std::string_view s) {
        if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
        std::string out = "\"";
        for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
        return out + "\"";
    };
    fmt::memory_buffer buf;
    auto it = std::back_inserter(buf);
    fmt::format_to(it, "# format={}\n# experiment={}\n# seed={}\n# config_hash={}\n# passed={}\n", kReportFormat,
                   report.experiment, report.seed, report.config_hash, report.passed());
    fmt::format_to(it, "kind,name,value,unit,requirement,passed\n");
    for (const auto& c : report.criteria)
        fmt::format_to(it, "criterion,{},{},{},{},{}\n", quote(c.name), c.measured, quote(c.unit), quote(c.requirement),
                       c.passed);
    for (const auto& q : report.values) fmt::format_to(it, "value,{},{},{},,\n", quote(q.name), q.value, quote(q.unit));
    for (const auto& a : report.artifacts) fmt::format_to(it, "artifact,{},,,,\n", quote(a));
    for (const auto& n : report.notes) fmt::format_to(it, "note,{},,,,\n", quote(n));
    return fmt::to_string(buf);
}

}  // namespace sas
