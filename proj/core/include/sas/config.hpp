#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "sas/closed_loop.hpp"
#include "sas/laser_plant.hpp"
#include "sas/lock_servo.hpp"
#include "sas/spectrum.hpp"

namespace sas {

inline constexpr std::string_view kConfigFormat = "format=sas-config/1";

struct MarkerConfig {
    Interval window{-700e6, 300e6};  // 87Rb F=2 manifold
    MarkerSelection selection = MarkerSelection::defaults();
};

struct ReadoutConfig {
    double halfspan_hz = 1.5e9;
    double step_hz = 0.1e6;
};

struct LockExperimentConfig {
    double duration_s = 1.2;
    double dt_s = 1e-6;
    std::size_t log_every = 10;
    double settle_s = 0.05;       // excluded after Locked before the hold statistics
    double ramp_test_s = 0.1;     // ramp re-enabled while Locked at the end; 0 disables
};

struct TempStepConfig {
    double step_k = 0.1;
    double step_time_s = 0.5;
    double settle_s = 15.0;       // simulated after the step
    double dt_s = 10e-6;
    std::size_t log_every = 10;
    double average_s = 0.2;       // window for the before/after control levels
    double band_hz = 0.5e6;       // resettle band around the lock point
};

struct FluorescenceConfig {
    double low_detuning_fwhm = 0.5;   // in units of the Doppler FWHM
    double large_detuning_fwhm = 3.0;
};

struct PumpRepumpConfig {
    FeatureRef pump = default_pump_feature();
    FeatureRef repump = default_repump_feature();
};

/// Everything one run needs. Paths are resolved relative to the config file.
struct ScenarioConfig {
    std::filesystem::path line_data;
    MediumConfig medium;
    SweepSpec sweep;
    NoiseConfig noise;  // noise.seed is overwritten by `seed`
    PlantConfig plant;
    RampConfig ramp;
    PidConfig pid{.kp = 0.1, .ki = 1000.0};
    ServoConfig servo;
    MarkerConfig markers;
    ReadoutConfig readout;
    LockExperimentConfig lock;
    TempStepConfig temp_step;
    FluorescenceConfig fluorescence;
    PumpRepumpConfig pump_repump;
    std::uint64_t seed = 1;

    /// Throws ConfigError naming the offending section.key.
    void validate() const;
    ClosedLoopConfig loop() const { return {plant, ramp, pid, servo}; }
};

/// Parses the sectioned key=value text. Unknown sections or keys, duplicate
/// keys and malformed values throw ConfigError with the line number.
/// A relative lines.path is resolved against `base_dir`.
ScenarioConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

/// Canonical text with every key, shortest round-trip numbers.
std::string serialize_config(const ScenarioConfig& cfg);

/// 16 hex digits of FNV-1a over the canonical text, excluding the seed.
std::string config_hash(const ScenarioConfig& cfg);

}  // namespace sas
