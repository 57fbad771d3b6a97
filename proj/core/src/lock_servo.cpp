#include "sas/lock_servo.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "sas/error.hpp"

namespace sas {

void PidConfig::validate() const {
    if (!(output_min < output_max)) throw ValidationError("pid.output_min must be below pid.output_max");
    if (derivative_smoothing < 1) throw ValidationError("pid.derivative_smoothing must be >= 1");
    if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd) || !std::isfinite(offset))
        throw ValidationError("pid gains and offset must be finite");
}

PidState make_pid_state(const PidConfig& cfg) {
    PidState st;
    st.history.assign(cfg.derivative_smoothing, 0.0);
    st.last_output = std::clamp(cfg.offset, cfg.output_min, cfg.output_max);
    return st;
}

double pid_step(const PidConfig& cfg, PidState& st, double error, double dt) {
    if (!(dt > 0.0)) throw ValidationError("pid_step needs dt > 0");
    if (st.history.size() != cfg.derivative_smoothing) {
        st.history.assign(cfg.derivative_smoothing, error);
        st.head = 0;
    }
    if (!st.primed) {
        std::fill(st.history.begin(), st.history.end(), error);
        st.prev_error = error;
        st.prev_smoothed = error;
        st.primed = true;
    }

    st.history[st.head] = error;
    st.head = (st.head + 1) % st.history.size();
    double smoothed = 0.0;
    for (double e : st.history) smoothed += e;
    smoothed /= static_cast<double>(st.history.size());

    const double p = cfg.kp * error;
    const double d = cfg.kd * (smoothed - st.prev_smoothed) / dt;
    const double increment = cfg.ki * 0.5 * (error + st.prev_error) * dt;

    // Conditional integration: skip the increment when it would push an
    // already saturated output further into the rail.
    const double trial = p + st.integrator + increment + d + cfg.offset;
    const bool winding_up = (trial > cfg.output_max && increment > 0.0) || (trial < cfg.output_min && increment < 0.0);
    if (!winding_up) st.integrator += increment;
    st.integrator = std::clamp(st.integrator, cfg.output_min - cfg.offset, cfg.output_max - cfg.offset);

    st.prev_error = error;
    st.prev_smoothed = smoothed;
    st.last_output = std::clamp(p + st.integrator + d + cfg.offset, cfg.output_min, cfg.output_max);
    return st.last_output;
}

void ServoConfig::validate() const {
    if (smoothing_window == 0 || smoothing_window % 2 == 0) throw ValidationError("servo.smoothing_window must be odd");
    if (!(derivative_scale_hz > 0.0)) throw ValidationError("servo.derivative_scale_hz must be positive");
    if (!(search_halfwidth_hz > 0.0)) throw ValidationError("servo.search_halfwidth_hz must be positive");
    if (!(min_feature_amplitude >= 0.0)) throw ValidationError("servo.min_feature_amplitude must be non-negative");
    if (!(input_filter_tau >= 0.0)) throw ValidationError("servo.input_filter_tau must be non-negative");
    if (!(detector_tau >= 0.0)) throw ValidationError("servo.detector_tau must be non-negative");
    if (!(lock_threshold > 0.0) || !(loss_threshold > lock_threshold))
        throw ValidationError("servo thresholds need 0 < lock_threshold < loss_threshold");
    if (!(hold_time >= 0.0) || !(loss_time >= 0.0) || !(relock_delay >= 0.0) || !(sweep_time >= 0.0))
        throw ValidationError("servo times must be non-negative");
    if (!(min_level_fraction >= 0.0 && min_level_fraction < 1.0))
        throw ValidationError("servo.min_level_fraction must be in [0,1)");
}

std::vector<double> conditioned_error(const SweepTrace& trace, const ServoConfig& servo, double offset) {
    auto err = error_signal(trace, servo.mode, servo.smoothing_window);
    const double scale = servo.mode == ErrorMode::Derivative ? servo.derivative_scale_hz : 1.0;
    for (double& e : err) e = e * scale + offset;
    return err;
}

namespace {

double interpolate_crossing(double x0, double y0, double x1, double y1) {
    if (y0 == y1) return 0.5 * (x0 + x1);
    return x0 + (x1 - x0) * y0 / (y0 - y1);
}

// Centred slope of y around index k, spanning `half` samples each side.
double local_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t k, std::size_t half) {
    const std::size_t lo = k >= half ? k - half : 0;
    const std::size_t hi = std::min(k + half, x.size() - 1);
    if (hi == lo) return 0.0;
    return (y[hi] - y[lo]) / (x[hi] - x[lo]);
}

}  // namespace

LockPoint find_lock_point(const SweepTrace& trace, const LineTable& table, const ServoConfig& servo) {
    const auto line = find_feature(table, servo.target);
    trace.validate();
    const auto& x = trace.detuning_hz;
    const Interval window{line.detuning_hz - servo.search_halfwidth_hz, line.detuning_hz + servo.search_halfwidth_hz};

    std::size_t first = x.size(), last = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (window.contains(x[i])) {
            first = std::min(first, i);
            last = i;
        }
    if (first >= x.size() || last < first + 2)
        throw UnlockableError(fmt::format("feature {} lies outside the sweep", servo.target.str()));

    const auto smooth = moving_average(trace.differential_v, servo.smoothing_window);
    std::size_t k = first;
    for (std::size_t i = first; i <= last; ++i)
        if (std::abs(smooth[i]) > std::abs(smooth[k])) k = i;
    const double peak = smooth[k];

    LockPoint lp;
    std::vector<double> err;
    std::size_t at = k;
    if (servo.mode == ErrorMode::Derivative) {
        err = conditioned_error(trace, servo);
        // Zero crossing next to the extremum.
        std::size_t j = x.size();
        for (std::size_t i = (k > first ? k - 1 : first); i < std::min(k + 1, last); ++i)
            if ((err[i] <= 0.0) != (err[i + 1] <= 0.0)) {
                j = i;
                break;
            }
        if (j == x.size()) throw UnlockableError(fmt::format("no error zero crossing at {}", servo.target.str()));
        lp.detuning_hz = interpolate_crossing(x[j], err[j], x[j + 1], err[j + 1]);
        at = std::abs(err[j]) < std::abs(err[j + 1]) ? j : j + 1;
    } else {
        lp.required_offset = -0.5 * peak;
        err = conditioned_error(trace, servo, lp.required_offset);
        std::size_t j = k;
        while (j > first && (err[j - 1] <= 0.0) == (err[k] <= 0.0)) --j;
        if (j == first) throw UnlockableError(fmt::format("no half-height point below {}", servo.target.str()));
        lp.detuning_hz = interpolate_crossing(x[j - 1], err[j - 1], x[j], err[j]);
        at = std::abs(err[j - 1]) < std::abs(err[j]) ? j - 1 : j;
    }

    for (std::size_t i = first; i <= last; ++i) lp.feature_amplitude = std::max(lp.feature_amplitude, std::abs(err[i]));
    if (lp.feature_amplitude < servo.min_feature_amplitude || lp.feature_amplitude == 0.0)
        throw UnlockableError(fmt::format("feature {} is too weak to lock (amplitude {:.3g} V)", servo.target.str(),
                                          lp.feature_amplitude));

    lp.slope = local_slope(x, err, at, std::max<std::size_t>(1, servo.smoothing_window / 2));
    if (lp.slope == 0.0 || !std::isfinite(lp.slope))
        throw UnlockableError(fmt::format("zero error slope at {}", servo.target.str()));
    lp.slope_sign = lp.slope > 0.0 ? 1 : -1;

    // Level of the raw differential at the lock point.
    auto it = std::lower_bound(x.begin(), x.end(), lp.detuning_hz);
    std::size_t hi = std::clamp<std::size_t>(static_cast<std::size_t>(it - x.begin()), 1, x.size() - 1);
    const double f = (lp.detuning_hz - x[hi - 1]) / (x[hi] - x[hi - 1]);
    lp.level = trace.differential_v[hi - 1] + f * (trace.differential_v[hi] - trace.differential_v[hi - 1]);
    return lp;
}

std::string_view to_string(LockPhase phase) {
    switch (phase) {
        case LockPhase::Sweeping: return "sweeping";
        case LockPhase::Engaging: return "engaging";
        case LockPhase::Locked: return "locked";
        case LockPhase::Lost: return "lost";
    }
    return "?";
}

LockPhase parse_lock_phase(std::string_view text) {
    for (auto p : {LockPhase::Sweeping, LockPhase::Engaging, LockPhase::Locked, LockPhase::Lost})
        if (to_string(p) == text) return p;
    throw ParseError(fmt::format("unknown lock phase '{}'", text));
}

bool is_legal_transition(LockPhase from, LockPhase to) {
    if (from == to) return true;
    switch (from) {
        case LockPhase::Sweeping: return to == LockPhase::Engaging;
        case LockPhase::Engaging: return to == LockPhase::Locked;
        case LockPhase::Locked: return to == LockPhase::Lost;
        case LockPhase::Lost: return to == LockPhase::Sweeping;
    }
    return false;
}

LockState make_lock_state(const ServoConfig& servo, const LockPoint& point, double plant_gain) {
    LockState st;
    st.target = servo.target;
    st.lock_point_detuning = point.detuning_hz;
    st.polarity = point.slope_sign * plant_gain > 0.0 ? -1 : 1;
    if (servo.invert_polarity) st.polarity = -st.polarity;
    return st;
}

namespace {

double smoothing_factor(double dt, double tau) { return tau > 0.0 ? -std::expm1(-dt / tau) : 1.0; }

void enter(LockState& lock, LockPhase phase) {
    lock.phase = phase;
    lock.time_in_phase = 0.0;
    lock.condition_time = 0.0;
}

}  // namespace

LockOutput lock_step(LockState& lock, PidState& pid, const PidConfig& pid_cfg, const ServoConfig& servo,
                     const LockPoint& point, const Measurement& m, double dt) {
    if (!(dt > 0.0)) throw ValidationError("lock_step needs dt > 0");

    lock.filtered_error += smoothing_factor(dt, servo.input_filter_tau) * (m.error - lock.filtered_error);
    const double a = smoothing_factor(dt, servo.detector_tau);
    lock.detector_error += a * (lock.filtered_error - lock.detector_error);
    lock.detector_level += a * (m.level - lock.detector_level);
    lock.time_in_phase += dt;

    const double amplitude = point.feature_amplitude;
    const bool level_ok = point.level == 0.0 || lock.detector_level / point.level >= servo.min_level_fraction;
    const double abs_err = std::abs(lock.detector_error);

    LockOutput out;
    switch (lock.phase) {
        case LockPhase::Sweeping:
            out.control = pid.last_output;
            out.ramp_enable = true;
            if (lock.time_in_phase >= servo.sweep_time) {
                enter(lock, LockPhase::Engaging);
                pid = make_pid_state(pid_cfg);
                lock.filtered_error = 0.0;
                lock.detector_error = 0.0;
                lock.detector_level = point.level;
                out.control = pid.last_output;
                out.ramp_enable = false;
                out.engaged = true;
            }
            return out;

        case LockPhase::Engaging:
        case LockPhase::Locked: {
            out.ramp_enable = false;
            out.control = pid_step(pid_cfg, pid, lock.polarity * lock.filtered_error, dt);
            if (lock.phase == LockPhase::Engaging) {
                const bool good = abs_err < servo.lock_threshold * amplitude && level_ok;
                lock.condition_time = good ? lock.condition_time + dt : 0.0;
                if (good && lock.condition_time >= servo.hold_time) enter(lock, LockPhase::Locked);
            } else {
                const bool bad = abs_err > servo.loss_threshold * amplitude || !level_ok;
                lock.condition_time = bad ? lock.condition_time + dt : 0.0;
                if (bad && lock.condition_time >= servo.loss_time) enter(lock, LockPhase::Lost);
            }
            return out;
        }

        case LockPhase::Lost:
            out.control = pid.last_output;
            out.ramp_enable = false;
            if (lock.time_in_phase >= servo.relock_delay) {
                enter(lock, LockPhase::Sweeping);
                out.ramp_enable = true;
            }
            return out;
    }
    return out;
}

}  // namespace sas
