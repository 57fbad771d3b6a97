#include "sas/laser_plant.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "sas/error.hpp"

namespace sas {

void PlantConfig::validate() const {
    if (k_current == 0.0 || !std::isfinite(k_current)) throw ValidationError("plant.k_current must be non-zero");
    if (k_ctrl == 0.0 || !std::isfinite(k_ctrl)) throw ValidationError("plant.k_ctrl must be non-zero");
    if (!std::isfinite(k_temp)) throw ValidationError("plant.k_temp must be finite");
    if (!(linewidth >= 0.0)) throw ValidationError("plant.linewidth must be non-negative");
    if (!(mode_hop_span > 0.0)) throw ValidationError("plant.mode_hop_span must be positive");
    if (!(thermal_tau > 0.0)) throw ValidationError("plant.thermal_tau must be positive");
    if (!(reference_temperature > 0.0)) throw ValidationError("plant.reference_temperature must be positive");
    if (!std::isfinite(drift_rate)) throw ValidationError("plant.drift_rate must be finite");
}

RampShape parse_ramp_shape(std::string_view text) {
    if (text == "triangle") return RampShape::Triangle;
    if (text == "sawtooth") return RampShape::Sawtooth;
    throw ParseError(fmt::format("unknown ramp shape '{}'", text));
}

std::string_view to_string(RampShape shape) {
    return shape == RampShape::Triangle ? "triangle" : "sawtooth";
}

void RampConfig::validate() const {
    if (!(frequency > 0.0)) throw ValidationError("ramp.frequency must be positive");
    if (!(span >= 0.0)) throw ValidationError("ramp.span must be non-negative");
}

LaserState initial_state(const PlantConfig& cfg) {
    LaserState s;
    s.current = cfg.bias_current;
    s.current_setpoint = cfg.bias_current;
    s.temperature = cfg.reference_temperature;
    s.mount_temperature = cfg.reference_temperature;
    s.detuning = cfg.base_detuning;
    return s;
}

double ramp_waveform(double t, const RampConfig& ramp) {
    if (!ramp.enabled) return 0.0;
    double cycles = t * ramp.frequency;
    double phase = cycles - std::floor(cycles);
    if (ramp.shape == RampShape::Sawtooth) return ramp.span * (phase - 0.5);
    return phase < 0.5 ? ramp.span * (2.0 * phase - 0.5) : ramp.span * (1.5 - 2.0 * phase);
}

double frequency_noise_sample(double linewidth, double dt, Rng& rng) {
    if (linewidth <= 0.0) return 0.0;
    std::normal_distribution<double> gauss(0.0, std::sqrt(linewidth / (2.0 * std::numbers::pi * dt)));
    return gauss(rng);
}

double static_detuning(const LaserState& state, const PlantConfig& cfg) {
    return cfg.base_detuning + cfg.k_current * (state.current - cfg.bias_current) +
           cfg.k_temp * (state.temperature - cfg.reference_temperature);
}

LaserState step_plant(const LaserState& state, const PlantConfig& cfg, const RampConfig& ramp,
                      const PlantInputs& inputs, double dt, Rng& rng) {
    if (!(dt > 0.0)) throw ValidationError("plant step needs dt > 0");
    LaserState next = state;
    next.elapsed = state.elapsed + dt;

    const double target = inputs.temp_setpoint + inputs.disturbance;
    next.mount_temperature = target + (state.mount_temperature - target) * std::exp(-dt / cfg.thermal_tau);
    next.drift_offset = state.drift_offset + cfg.drift_rate * dt;
    next.temperature = next.mount_temperature + next.drift_offset;

    next.current = state.current_setpoint + cfg.k_ctrl * state.control_voltage;

    const double cycles = next.elapsed * ramp.frequency;
    next.ramp_phase = cycles - std::floor(cycles);

    double detuning = static_detuning(next, cfg);
    if (inputs.ramp_enabled) detuning += ramp_waveform(next.elapsed, ramp);
    if (inputs.frequency_noise) detuning += frequency_noise_sample(cfg.linewidth, dt, rng);
    next.detuning = detuning;

    if (std::abs(detuning - cfg.base_detuning) > 0.5 * cfg.mode_hop_span)
        throw ModeHopFault(fmt::format("mode hop: detuning {:.6g} Hz outside the {:.6g} Hz tuning span at t={:.6g} s",
                                       detuning, cfg.mode_hop_span, next.elapsed),
                           detuning);
    return next;
}

}  // namespace sas
