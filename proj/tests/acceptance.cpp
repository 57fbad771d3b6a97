// One PASS/FAIL line per acceptance criterion, on the pinned defaults.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "sas/closed_loop.hpp"
#include "sas/experiments.hpp"
#include "sas/lineshape.hpp"
#include "sas/lock_servo.hpp"
#include "sas/trace_io.hpp"
#include "test_support.hpp"

using namespace sas;

namespace {

struct Outcome {
    bool passed;
    std::string detail;
};

// Tolerances, pinned.
constexpr double kFwhmRel = 1e-9;
constexpr double kNormTol = 1e-6;
constexpr double kDopplerOracle = 521965514.4546032;  // Hz, independent one-line evaluation
constexpr double kDopplerTol = 1e3;
constexpr double kTrapezoidTol = 1e-12;
constexpr double kMarkerRel = 0.01;
constexpr double kDisturbanceVolts = 2.8;
constexpr double kDisturbanceRel = 0.02;

double numeric_fwhm(const std::function<double(double)>& f, double nu0, double w) {
    const double half = 0.5 * f(nu0);
    double lo = nu0, hi = nu0 + 10.0 * w;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (f(mid) > half ? lo : hi) = mid;
    }
    return 2.0 * (0.5 * (lo + hi) - nu0);
}

Outcome lineshapes() {
    const LorentzianParams l{1.0e6, 6.0666e6};
    const GaussianParams g{2.0e8, 5.2e8};
    const double lw = numeric_fwhm([&](double x) { return lorentzian(x, l); }, l.nu0, l.gamma_fwhm);
    const double gw = numeric_fwhm([&](double x) { return doppler_gaussian(x, g); }, g.nu0, g.fwhm);
    using boost::math::quadrature::gauss_kronrod;
    const double area = gauss_kronrod<double, 61>::integrate([&](double x) { return doppler_gaussian(x, g); },
                                                             g.nu0 - 10 * g.fwhm, g.nu0 + 10 * g.fwhm, 15, 1e-14);
    const double el = std::abs(lw / l.gamma_fwhm - 1), eg = std::abs(gw / g.fwhm - 1);
    return {lorentzian(l.nu0, l) == 1.0 && el < kFwhmRel && eg < kFwhmRel && std::abs(area - 1) < kNormTol,
            fmt::format("L(nu0)={} fwhm_err L={:.1e} G={:.1e} area-1={:.1e}", lorentzian(l.nu0, l), el, eg, area - 1)};
}

Outcome doppler_width() {
    const double m87 = sas::test::bundled_table().isotope(IsotopeId::Rb87).mass_kg;
    const double got = doppler_fwhm(312.65, m87, 384.230e12);
    return {std::abs(got - kDopplerOracle) < kDopplerTol,
            fmt::format("{:.4f} Hz vs oracle {:.4f} Hz", got, kDopplerOracle)};
}

Outcome separation() {
    const double s = pump_repump_separation(sas::test::bundled_table());
    return {s >= 6.4e9 && s <= 6.7e9, fmt::format("{:.6f} GHz in [6.4, 6.7]", s / 1e9)};
}

Outcome depth_thresholds(const ExperimentReport& sweep) {
    const auto* a = sweep.criterion("doppler_depth");
    const auto* b = sweep.criterion("hyperfine_depth");
    const auto* c = sweep.criterion("crossover_depth");
    if (!a || !b || !c) return {false, "depth criteria missing"};
    return {a->passed && b->passed && c->passed,
            fmt::format("doppler {:.2f}% > 30, hyperfine {:.2f}% > 2.5, crossover {:.2f}% > 15", a->measured,
                        b->measured, c->measured)};
}

Outcome census(const ScenarioConfig& cfg) {
    auto quiet = cfg.noise;
    quiet.enabled = false;
    const auto t = synthesize_sweep(sas::test::bundled_table(), cfg.medium, cfg.sweep, quiet);
    const auto n = count_sub_doppler_extrema(t, cfg.markers.window);
    return {n == 6, fmt::format("{} extrema in the Rb87 F=2 window", n)};
}

Outcome lock_hold(const ExperimentReport& lock) {
    const auto* reach = lock.criterion("reaches_locked");
    const auto* rms = lock.criterion("post_lock_rms_error");
    const auto* pp = lock.criterion("control_peak_to_peak");
    const auto* window = lock.value("hold_window");
    if (!reach || !rms || !pp || !window) return {false, "lock criteria missing"};
    return {reach->passed && rms->passed && pp->passed && window->value >= 1.0,
            fmt::format("locked={} rms {:.3f}% < 2, control p-p {:.4f}% < 1, over {:.3f} s", reach->passed,
                        rms->measured, pp->measured, window->value)};
}

Outcome disturbance(const ExperimentReport& r) {
    const auto* up = r.criterion("step_delta_control");
    const auto* down = r.criterion("mirror_delta_control");
    const auto* s1 = r.criterion("step_resettle");
    const auto* s2 = r.criterion("mirror_resettle");
    const auto* l1 = r.criterion("step_stays_locked");
    const auto* l2 = r.criterion("mirror_stays_locked");
    if (!up || !down || !s1 || !s2 || !l1 || !l2) return {false, "temperature-step criteria missing"};
    const bool volts = std::abs(up->measured - kDisturbanceVolts) <= kDisturbanceRel * kDisturbanceVolts &&
                       std::abs(down->measured + kDisturbanceVolts) <= kDisturbanceRel * kDisturbanceVolts;
    return {volts && s1->passed && s2->passed && l1->passed && l2->passed,
            fmt::format("+0.1 K: {:+.4f} V, -0.1 K: {:+.4f} V (2.8 V +- 2%), resettle excursion {:.0f}/{:.0f} Hz",
                        up->measured, down->measured, s1->measured, s2->measured)};
}

Outcome fluorescence(const ExperimentReport& r) {
    std::string failed;
    for (const auto& c : r.criteria)
        if (!c.passed) failed += c.name + " ";
    const auto* f0 = r.value("brightness_locked");
    const auto* fl = r.value("brightness_large");
    return {r.passed() && !r.criteria.empty(),
            fmt::format("F(lock)={:.6f} F(3 dnuD)={:.3e} {}", f0 ? f0->value : NAN, fl ? fl->value : NAN,
                        failed.empty() ? "" : "failed: " + failed)};
}

Outcome determinism(const ScenarioConfig& cfg) {
    const auto a = sas::test::scratch_dir("accept_det_a"), b = sas::test::scratch_dir("accept_det_b");
    std::size_t compared = 0;
    using Runner = ExperimentReport (*)(const ScenarioConfig&, const OutputSpec&);
    for (Runner run : {Runner(run_sweep_experiment), Runner(run_lock_experiment), Runner(run_temp_step_experiment),
                       Runner(run_fluorescence_experiment)}) {
        const auto ra = run(cfg, {a});
        const auto rb = run(cfg, {b});
        if (report_json(ra) != report_json(rb) || report_csv(ra) != report_csv(rb))
            return {false, ra.experiment + " report differs"};
        for (const auto& rel : ra.artifacts) {
            if (read_file(a / rel) != read_file(b / rel)) return {false, rel + " differs"};
            ++compared;
        }
        compared += 2;
    }
    return {true, fmt::format("{} artifacts and reports byte-identical", compared)};
}

Outcome controller() {
    PidConfig c{.ki = 1.0};
    auto st = make_pid_state(c);
    double out = 0.0;
    for (int k = 0; k < 10; ++k) out = pid_step(c, st, 1.0, 0.1);
    const double trap_err = std::abs(out - 1.0);

    sas::test::Gen g(2024);
    std::size_t violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const double lo = g.uniform(-10, 0), hi = lo + g.uniform(0.1, 20);
        PidConfig f{.kp = g.log_uniform(1e-3, 1e3), .ki = g.log_uniform(1e-2, 1e5), .kd = g.uniform(0, 1e-2),
                    .offset = g.uniform(lo, hi), .output_min = lo, .output_max = hi,
                    .derivative_smoothing = static_cast<std::size_t>(g.integer(1, 5))};
        auto s = make_pid_state(f);
        const double dt = g.log_uniform(1e-7, 1e-2);
        for (int k = 0; k < 20; ++k) {
            const double u = pid_step(f, s, g.uniform(-1e3, 1e3), dt);
            if (u < lo || u > hi) ++violations;
        }
    }

    const auto cfg = sas::test::default_config();
    const SpectrumModel model(sas::test::bundled_table(), cfg.medium);
    const ErrorReadout readout(model, cfg.servo, cfg.readout.halfspan_hz, cfg.readout.step_hz);
    auto loop = cfg.loop();
    loop.servo.invert_polarity = true;
    Scenario sc;
    sc.duration_s = 100e-6;
    sc.start_locked = true;
    sc.frequency_noise = false;
    sc.initial_offset_hz = 0.5e6;
    const auto log = closed_loop_run(loop, readout, sc, cfg.seed);
    const double e0 = std::abs(log.error_v.front()), e1 = std::abs(log.error_v.back());
    const bool diverges = e0 > 0.0 && e1 > e0;

    return {trap_err <= kTrapezoidTol && violations == 0 && diverges,
            fmt::format("trapezoid err {:.1e}, clamp violations {}/200000, wrong polarity |e| {:.2e} -> {:.2e} V",
                        trap_err, violations, e0, e1)};
}

Outcome round_trips(const ScenarioConfig& cfg, const ExperimentReport& sweep) {
    const auto& table = sas::test::bundled_table();
    const bool lines_ok = parse_line_data(serialize_line_data(table)) == table;

    const auto t = synthesize_sweep(table, cfg.medium, cfg.sweep, cfg.noise);
    std::string csv = "time_s,reference_v,probe_v\n";
    for (std::size_t i = 0; i < t.size(); ++i)
        csv += fmt::format("{},{},{}\n", (t.detuning_hz[i] - t.detuning_hz.front()) * 1e-12, t.reference_v[i],
                           t.probe_v[i]);
    const auto path = sas::test::scratch_dir("accept_ingest") / "scope.csv";
    write_file(path, csv);
    const auto in = ingest_scope_csv(path, ColumnMap{}, Calibration{}, table);
    const SpectrumModel model(table, cfg.medium);
    const auto m = extract_markers(in, table, cfg.markers.window, cfg.markers.selection, default_marker_options(model));
    double worst = 0.0;
    const double got[] = {m.a, m.b, m.c, m.d};
    const char* names[] = {"marker_a", "marker_b", "marker_c", "marker_d"};
    for (int i = 0; i < 4; ++i) {
        const auto* ref = sweep.value(names[i]);
        if (!ref) return {false, std::string(names[i]) + " missing from sweep report"};
        worst = std::max(worst, std::abs(got[i] / ref->value - 1.0));
    }
    return {lines_ok && worst < kMarkerRel,
            fmt::format("line data identity={}, worst marker deviation {:.3f}% < 1%", lines_ok, 100 * worst)};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.passed) ++failures;
        std::printf("%s %2d %-26s %s\n", o.passed ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
    };

    const auto cfg = sas::test::default_config();
    ExperimentReport sweep, lock, step, fluo;
    try {
        sweep = run_sweep_experiment(cfg);
        lock = run_lock_experiment(cfg);
        step = run_temp_step_experiment(cfg);
        fluo = run_fluorescence_experiment(cfg);
    } catch (const std::exception& e) {
        std::printf("experiment run failed: %s\n", e.what());
    }

    report(1, "line-shape closed forms", lineshapes);
    report(2, "Doppler width", doppler_width);
    report(3, "pump-repump separation", separation);
    report(4, "depth thresholds", [&] { return depth_thresholds(sweep); });
    report(5, "feature census", [&] { return census(cfg); });
    report(6, "lock engage and hold", [&] { return lock_hold(lock); });
    report(7, "disturbance rejection", [&] { return disturbance(step); });
    report(8, "fluorescence proxy", [&] { return fluorescence(fluo); });
    report(9, "determinism", [&] { return determinism(cfg); });
    report(10, "controller properties", controller);
    report(11, "round trips", [&] { return round_trips(cfg, sweep); });

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
