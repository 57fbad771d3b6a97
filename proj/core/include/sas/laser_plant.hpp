#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sas {

using Rng = std::mt19937_64;

/// Tuning model of a current- and temperature-tuned DBR diode laser.
struct PlantConfig {
    double k_current = -1.0e12;       // Hz/A  (-1 GHz/mA)
    double k_temp = 28.0e9;           // Hz/K
    double k_ctrl = 1.0e-3;           // A/V   (servo voltage -> injection current)
    double linewidth = 0.5e6;         // Hz, white-frequency-noise Lorentzian FWHM
    double mode_hop_span = 30.0e9;    // Hz, mode-hop-free tuning range
    double drift_rate = 0.1e-3 / 3600.0;  // K/s
    double base_detuning = 0.0;       // Hz at bias current and reference temperature
    double bias_current = 0.150;      // A
    double reference_temperature = 298.15;  // K
    double thermal_tau = 2.0;         // s

    /// Hz per volt of servo output: k_current * k_ctrl.
    double control_gain() const { return k_current * k_ctrl; }
    /// Throws ValidationError.
    void validate() const;
};

enum class RampShape { Triangle, Sawtooth };

RampShape parse_ramp_shape(std::string_view text);
std::string_view to_string(RampShape shape);

struct RampConfig {
    double frequency = 500.0;  // Hz
    double span = 20.0e6;      // Hz of optical detuning, peak to peak
    RampShape shape = RampShape::Triangle;
    bool enabled = true;

    void validate() const;
};

struct LaserState {
    double current = 0.0;           // A
    double current_setpoint = 0.0;  // A, operator bias before servo correction
    double temperature = 0.0;       // K (relaxed mount temperature + drift)
    double mount_temperature = 0.0; // K
    double drift_offset = 0.0;      // K accumulated free drift
    double control_voltage = 0.0;   // V
    double ramp_phase = 0.0;        // [0,1)
    double detuning = 0.0;          // Hz, relative to the line-table carrier
    double elapsed = 0.0;           // s

    bool operator==(const LaserState&) const = default;
};

struct PlantInputs {
    double temp_setpoint = 298.15;  // K
    double disturbance = 0.0;       // K added to the setpoint
    bool ramp_enabled = true;       // ANDed with RampConfig::enabled
    bool frequency_noise = true;
};

/// Equilibrium state at bias current and reference temperature.
LaserState initial_state(const PlantConfig& cfg);

/// Ramp offset in Hz. Triangle starts at -span/2, reaches +span/2 at half period.
double ramp_waveform(double t, const RampConfig& ramp);

/// Zero-mean Gaussian with variance linewidth / (2 pi dt). Integrating this
/// white frequency noise into phase gives a Lorentzian field spectrum whose
/// FWHM equals `linewidth`.
double frequency_noise_sample(double linewidth, double dt, Rng& rng);

/// Noise-free detuning of `state` (no ramp, no frequency noise).
double static_detuning(const LaserState& state, const PlantConfig& cfg);

/// Advances the plant by dt. Throws ModeHopFault when the detuning leaves
/// base_detuning +- mode_hop_span/2.
LaserState step_plant(const LaserState& state, const PlantConfig& cfg, const RampConfig& ramp,
                      const PlantInputs& inputs, double dt, Rng& rng);

}  // namespace sas
