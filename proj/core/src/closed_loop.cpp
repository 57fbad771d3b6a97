#include "sas/closed_loop.hpp"

#include <algorithm>
#include <cmath>

#include "sas/error.hpp"

namespace sas {

ErrorReadout::ErrorReadout(const SpectrumModel& model, const ServoConfig& servo, double halfspan_hz, double step_hz) {
    if (!(halfspan_hz > 0.0) || !(step_hz > 0.0) || step_hz >= halfspan_hz)
        throw ValidationError("readout needs 0 < step < halfspan");
    const double centre = find_feature(model.table(), servo.target).detuning_hz;
    const auto n = static_cast<std::size_t>(std::llround(2.0 * halfspan_hz / step_hz)) + 1;
    trace_ = synthesize_sweep(model, SweepSpec{centre - halfspan_hz, centre + halfspan_hz, n}, NoiseConfig{false, 0.0, 0});
    start_ = trace_.detuning_hz.front();
    step_ = (trace_.detuning_hz.back() - start_) / static_cast<double>(n - 1);
    point_ = find_lock_point(trace_, model.table(), servo);
    error_ = conditioned_error(trace_, servo, point_.required_offset);
}

Measurement ErrorReadout::operator()(double detuning_hz) const {
    const double u = (detuning_hz - start_) / step_;
    const auto last = error_.size() - 1;
    if (!(u > 0.0)) return {error_.front(), trace_.differential_v.front()};
    if (u >= static_cast<double>(last)) return {error_.back(), trace_.differential_v.back()};
    const auto i = static_cast<std::size_t>(u);
    const double f = u - static_cast<double>(i);
    const auto& d = trace_.differential_v;
    return {error_[i] + f * (error_[i + 1] - error_[i]), d[i] + f * (d[i + 1] - d[i])};
}

void Scenario::validate() const {
    if (!(duration_s > 0.0)) throw ValidationError("scenario duration must be positive");
    if (!(dt_s > 0.0) || dt_s > duration_s) throw ValidationError("scenario dt must be in (0, duration]");
    if (log_every == 0) throw ValidationError("scenario log_every must be >= 1");
}

namespace {

// Operator bias current that puts the static detuning on `target` for the
// present temperature and control voltage.
double centring_setpoint(const LaserState& s, const PlantConfig& p, double target) {
    const double thermal = p.k_temp * (s.temperature - p.reference_temperature);
    return p.bias_current + (target - p.base_detuning - thermal) / p.k_current - p.k_ctrl * s.control_voltage;
}

void append(TimeSeriesLog& log, const LaserState& s, const LockState& lock) {
    log.t_s.push_back(s.elapsed);
    log.detuning_hz.push_back(s.detuning);
    log.error_v.push_back(lock.filtered_error);
    log.control_v.push_back(s.control_voltage);
    log.temperature_k.push_back(s.temperature);
    log.phase.push_back(lock.phase);
}

}  // namespace

TimeSeriesLog closed_loop_run(const ClosedLoopConfig& cfg, const ErrorReadout& readout, const Scenario& scenario,
                              std::uint64_t seed) {
    cfg.plant.validate();
    cfg.ramp.validate();
    cfg.pid.validate();
    cfg.servo.validate();
    scenario.validate();

    const LockPoint& point = readout.lock_point();
    Rng rng(seed);

    LaserState state = initial_state(cfg.plant);
    PidState pid = make_pid_state(cfg.pid);
    LockState lock = make_lock_state(cfg.servo, point, cfg.plant.control_gain());
    state.control_voltage = pid.last_output;
    state.current_setpoint = centring_setpoint(state, cfg.plant, point.detuning_hz + scenario.initial_offset_hz);
    state.current = state.current_setpoint + cfg.plant.k_ctrl * state.control_voltage;
    state.detuning = static_detuning(state, cfg.plant);

    if (scenario.start_locked) {
        lock.phase = LockPhase::Locked;
        const auto m = readout(state.detuning);
        lock.filtered_error = m.error;
        lock.detector_error = m.error;
        lock.detector_level = m.level;
    }

    auto steps = scenario.temp_steps;
    std::stable_sort(steps.begin(), steps.end(), [](const TempStep& a, const TempStep& b) { return a.time_s < b.time_s; });

    TimeSeriesLog log;
    log.seed = seed;
    const auto n = static_cast<std::size_t>(std::llround(scenario.duration_s / scenario.dt_s));
    const std::size_t reserve = n / scenario.log_every + 2;
    for (auto* v : {&log.t_s, &log.detuning_hz, &log.error_v, &log.control_v, &log.temperature_k}) v->reserve(reserve);
    log.phase.reserve(reserve);
    append(log, state, lock);

    PlantInputs inputs;
    inputs.temp_setpoint = cfg.plant.reference_temperature;
    inputs.frequency_noise = scenario.frequency_noise;
    inputs.ramp_enabled = !scenario.start_locked && cfg.ramp.enabled;
    std::size_t next_step = 0;

    for (std::size_t k = 1; k <= n; ++k) {
        const double t = static_cast<double>(k) * scenario.dt_s;
        while (next_step < steps.size() && steps[next_step].time_s <= t) inputs.disturbance += steps[next_step++].delta_k;

        try {
            state = step_plant(state, cfg.plant, cfg.ramp, inputs, scenario.dt_s, rng);
        } catch (const ModeHopFault& e) {
            log.fault = e.what();
            break;
        }

        const auto out = lock_step(lock, pid, cfg.pid, cfg.servo, point, readout(state.detuning), scenario.dt_s);
        state.control_voltage = out.control;
        if (out.engaged) state.current_setpoint = centring_setpoint(state, cfg.plant, point.detuning_hz);

        const bool injected = scenario.ramp_while_locked_from_s && lock.phase == LockPhase::Locked &&
                              t >= *scenario.ramp_while_locked_from_s;
        inputs.ramp_enabled = cfg.ramp.enabled && (out.ramp_enable || injected);

        if (k % scenario.log_every == 0) append(log, state, lock);
    }
    return log;
}

}  // namespace sas
