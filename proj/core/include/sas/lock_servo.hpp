#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "sas/atomic_data.hpp"
#include "sas/spectrum.hpp"

namespace sas {

struct PidConfig {
    double kp = 0.0;              // V/V
    double ki = 0.0;              // V/(V s)
    double kd = 0.0;              // V s/V
    double offset = 0.0;          // V
    double output_min = -10.0;    // V
    double output_max = 10.0;     // V
    std::size_t derivative_smoothing = 1;  // samples in the derivative's moving average

    void validate() const;
};

struct PidState {
    double integrator = 0.0;   // V, already multiplied by ki
    double prev_error = 0.0;
    double last_output = 0.0;
    double prev_smoothed = 0.0;
    std::vector<double> history;  // ring of recent errors for the derivative
    std::size_t head = 0;
    bool primed = false;
};

/// Quiescent state: zero integrator, output at `offset`.
PidState make_pid_state(const PidConfig& cfg);

/// Positional PID with trapezoidal integral, derivative of the moving-average
/// error, conditional-integration anti-windup and output clamping. Updates
/// `st` and returns the control voltage. Throws ValidationError for dt <= 0.
double pid_step(const PidConfig& cfg, PidState& st, double error, double dt);

struct ServoConfig {
    FeatureRef target = default_pump_feature();
    ErrorMode mode = ErrorMode::Derivative;
    std::size_t smoothing_window = 5;     // samples, for the derivative error signal
    double derivative_scale_hz = 1.0e6;   // derivative error in V per this many Hz
    double search_halfwidth_hz = 10.0e6;  // around the target's tabulated detuning
    double min_feature_amplitude = 1.0e-4;  // V; smaller features are unlockable
    double input_filter_tau = 100e-6;     // s, first-order filter on the servo input
    double detector_tau = 2e-3;           // s, averaging of the lock detector
    double lock_threshold = 0.02;         // fraction of the feature's error amplitude
    double hold_time = 20e-3;             // s
    double loss_threshold = 0.5;          // fraction of the feature's error amplitude
    double loss_time = 10e-3;             // s
    double min_level_fraction = 0.25;     // of the differential level at the lock point
    double relock_delay = 100e-3;         // s
    double sweep_time = 10e-3;            // s of ramping before each engage
    bool invert_polarity = false;

    void validate() const;
};

/// Where and how the loop locks on one feature of a sweep.
struct LockPoint {
    double detuning_hz = 0.0;
    int slope_sign = 1;            // sign of d(error)/d(detuning) at the lock point
    double slope = 0.0;            // V/Hz of the conditioned error
    double required_offset = 0.0;  // V added to the differential (Differential mode)
    double feature_amplitude = 0.0;  // V, peak |error| over the search window
    double level = 0.0;            // V, differential channel at the lock point
};

/// The conditioned error signal for `servo.mode`: the differential plus
/// `offset`, or the derivative scaled by derivative_scale_hz.
std::vector<double> conditioned_error(const SweepTrace& trace, const ServoConfig& servo, double offset = 0.0);

/// Derivative mode locks to the zero crossing at the feature extremum;
/// Differential mode to the half-height point on the low-detuning side.
/// Throws NotFoundError for an unknown feature, UnlockableError when the window
/// is empty, flat or has no crossing.
LockPoint find_lock_point(const SweepTrace& trace, const LineTable& table, const ServoConfig& servo);

enum class LockPhase { Sweeping, Engaging, Locked, Lost };

std::string_view to_string(LockPhase phase);
LockPhase parse_lock_phase(std::string_view text);
/// Sweeping->Engaging->Locked, Locked->Lost, Lost->Sweeping, and staying put.
bool is_legal_transition(LockPhase from, LockPhase to);

struct LockState {
    LockPhase phase = LockPhase::Sweeping;
    FeatureRef target;
    double lock_point_detuning = 0.0;
    double time_in_phase = 0.0;
    double condition_time = 0.0;  // how long the current lock/loss condition has held
    double filtered_error = 0.0;  // servo input after the input filter
    double detector_error = 0.0;
    double detector_level = 0.0;
    int polarity = -1;
};

/// Sweeping start for `point`; polarity = -sign(slope * plant_gain), flipped by
/// servo.invert_polarity. `plant_gain` is Hz per volt of control.
LockState make_lock_state(const ServoConfig& servo, const LockPoint& point, double plant_gain);

struct Measurement {
    double error = 0.0;  // V, conditioned error at the current detuning
    double level = 0.0;  // V, differential channel at the current detuning
};

struct LockOutput {
    double control = 0.0;
    bool ramp_enable = true;
    bool engaged = false;  // true on the step that entered Engaging
};

/// One supervisor step. Entering Engaging resets the PID to quiescence; the
/// caller re-centres the plant on the lock point when `engaged` is set.
/// Throws ValidationError for dt <= 0.
LockOutput lock_step(LockState& lock, PidState& pid, const PidConfig& pid_cfg, const ServoConfig& servo,
                     const LockPoint& point, const Measurement& m, double dt);

}  // namespace sas
