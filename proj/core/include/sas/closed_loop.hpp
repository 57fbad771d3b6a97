#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sas/laser_plant.hpp"
#include "sas/lock_servo.hpp"
#include "sas/spectrum.hpp"

namespace sas {

/// Quasi-static spectroscopy readout: the noise-free conditioned error and
/// differential level tabulated on a fine uniform grid around the lock target,
/// linearly interpolated and held constant beyond the grid.
class ErrorReadout {
public:
    ErrorReadout(const SpectrumModel& model, const ServoConfig& servo, double halfspan_hz = 1.5e9,
                 double step_hz = 0.1e6);

    Measurement operator()(double detuning_hz) const;

    const LockPoint& lock_point() const { return point_; }
    const SweepTrace& trace() const { return trace_; }
    const std::vector<double>& error() const { return error_; }

private:
    SweepTrace trace_;
    std::vector<double> error_;
    LockPoint point_;
    double start_ = 0.0;
    double step_ = 0.0;
};

struct ClosedLoopConfig {
    PlantConfig plant;
    RampConfig ramp;
    PidConfig pid;
    ServoConfig servo;
};

struct TempStep {
    double time_s = 0.0;
    double delta_k = 0.0;
};

struct Scenario {
    double duration_s = 1.0;
    double dt_s = 1e-6;
    std::vector<TempStep> temp_steps;  // setpoint offsets, cumulative
    bool start_locked = false;         // begin Locked at the lock point with a quiescent PID
    double initial_offset_hz = 0.0;    // added to the starting detuning
    bool frequency_noise = true;
    std::optional<double> ramp_while_locked_from_s;  // re-enable the ramp while Locked from this time
    std::size_t log_every = 1;

    void validate() const;
};

struct TimeSeriesLog {
    std::vector<double> t_s;
    std::vector<double> detuning_hz;
    std::vector<double> error_v;
    std::vector<double> control_v;
    std::vector<double> temperature_k;
    std::vector<LockPhase> phase;
    std::optional<std::string> fault;  // set when the run aborted early
    std::uint64_t seed = 0;
    std::string config_hash;

    std::size_t size() const { return t_s.size(); }
};

/// Steps plant and servo on one clock. Deterministic for a given seed.
/// A mode-hop fault ends the run and is recorded in `fault`.
TimeSeriesLog closed_loop_run(const ClosedLoopConfig& cfg, const ErrorReadout& readout, const Scenario& scenario,
                              std::uint64_t seed);

}  // namespace sas
