#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "sas/error.hpp"
#include "sas/laser_plant.hpp"
#include "test_support.hpp"

using namespace sas;

namespace {

PlantInputs quiet_inputs(const PlantConfig& p) {
    PlantInputs in;
    in.temp_setpoint = p.reference_temperature;
    in.ramp_enabled = false;
    in.frequency_noise = false;
    return in;
}

}  // namespace

TEST(LaserPlant, RampWaveformExamples) {
    RampConfig r;
    r.span = 20e6;
    EXPECT_DOUBLE_EQ(ramp_waveform(0.0, r), -10e6);
    EXPECT_DOUBLE_EQ(ramp_waveform(1e-3, r), 10e6);
    EXPECT_NEAR(ramp_waveform(2e-3, r), -10e6, 1e-3);
    EXPECT_NEAR(ramp_waveform(0.5e-3, r), 0.0, 1e-3);
    r.shape = RampShape::Sawtooth;
    EXPECT_DOUBLE_EQ(ramp_waveform(0.0, r), -10e6);
    EXPECT_NEAR(ramp_waveform(1.999e-3, r), 10e6 - 20e6 * 0.0005, 1e-3);
    r.enabled = false;
    for (double t : {0.0, 1e-4, 0.37, 12.0}) EXPECT_EQ(ramp_waveform(t, r), 0.0);
}

TEST(LaserPlant, RampIsZeroMeanOverOnePeriod) {
    PlantConfig p;
    p.base_detuning = 123.4e6;
    p.drift_rate = 0.0;
    RampConfig r;
    r.span = 500e6;
    Rng rng(1);
    auto in = quiet_inputs(p);
    auto s = initial_state(p);
    const double still = s.detuning;
    in.ramp_enabled = true;
    const int n = 1000;
    const double dt = 1.0 / (r.frequency * n);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        s = step_plant(s, p, r, in, dt, rng);
        sum += s.detuning;
    }
    EXPECT_NEAR(sum / n, still, 1e-9 * std::abs(still));
}

TEST(LaserPlant, StaticPlantHoldsDetuning) {
    PlantConfig p;
    p.drift_rate = 0.0;
    Rng rng(2);
    auto s = initial_state(p);
    s.control_voltage = 0.7;
    const auto in = quiet_inputs(p);
    s = step_plant(s, p, RampConfig{}, in, 1e-5, rng);
    const double d0 = s.detuning;
    for (int k = 0; k < 1000; ++k) {
        s = step_plant(s, p, RampConfig{}, in, 1e-5, rng);
        ASSERT_EQ(s.detuning, d0);
    }
}

TEST(LaserPlant, TemperatureAndControlGains) {
    PlantConfig p;
    p.drift_rate = 0.0;
    Rng rng(3);
    auto in = quiet_inputs(p);
    auto s = initial_state(p);
    in.disturbance = 0.1;
    // Long enough for the thermal relaxation to finish.
    for (int k = 0; k < 8000; ++k) s = step_plant(s, p, RampConfig{}, in, 0.01, rng);
    EXPECT_NEAR(s.detuning - p.base_detuning, 2.8e9, 1.0);

    auto v = initial_state(p);
    v.control_voltage = 1.0;
    v = step_plant(v, p, RampConfig{}, quiet_inputs(p), 1e-6, rng);
    EXPECT_NEAR(v.detuning - p.base_detuning, -1e9, 1e-3);
}

TEST(LaserPlant, AffineInControlAndTemperature) {
    sas::test::Gen g(4);
    Rng rng(0);
    for (int trial = 0; trial < 200; ++trial) {
        PlantConfig p;
        p.k_current = g.uniform(-2e12, -0.5e12);
        p.k_temp = g.uniform(10e9, 40e9);
        p.k_ctrl = g.uniform(0.5e-3, 2e-3) * (g.coin() ? 1 : -1);
        p.base_detuning = g.uniform(-1e9, 1e9);
        LaserState s = initial_state(p);
        s.control_voltage = g.uniform(-5, 5);
        s.temperature = s.mount_temperature = p.reference_temperature + g.uniform(-0.05, 0.05);
        s.current = s.current_setpoint + p.k_ctrl * s.control_voltage;
        const double base = static_detuning(s, p);
        auto dv = s;
        dv.control_voltage += 0.25;
        dv.current = dv.current_setpoint + p.k_ctrl * dv.control_voltage;
        auto dtmp = s;
        dtmp.temperature += 1e-3;
        EXPECT_NEAR((static_detuning(dv, p) - base) / 0.25, p.k_current * p.k_ctrl, 1e-5 * std::abs(p.control_gain()));
        EXPECT_NEAR((static_detuning(dtmp, p) - base) / 1e-3, p.k_temp, 1e-4 * p.k_temp);
    }
}

TEST(LaserPlant, EqualSeedsEqualTrajectories) {
    PlantConfig p;
    RampConfig r;
    PlantInputs in;
    in.temp_setpoint = p.reference_temperature + 0.01;
    Rng a(99), b(99);
    auto sa = initial_state(p), sb = initial_state(p);
    for (int k = 0; k < 5000; ++k) {
        sa = step_plant(sa, p, r, in, 1e-6, a);
        sb = step_plant(sb, p, r, in, 1e-6, b);
        ASSERT_EQ(sa, sb);
    }
}

TEST(LaserPlant, DriftAccumulatesLinearly) {
    PlantConfig p;
    Rng rng(5);
    auto s = initial_state(p);
    const auto in = quiet_inputs(p);
    for (int k = 0; k < 3600; ++k) s = step_plant(s, p, RampConfig{}, in, 1.0, rng);
    EXPECT_NEAR(s.temperature - p.reference_temperature, 1e-4, 1e-12);
}

TEST(LaserPlant, RampPhaseStaysInUnitInterval) {
    PlantConfig p;
    RampConfig r;
    Rng rng(6);
    auto s = initial_state(p);
    PlantInputs in;
    for (int k = 0; k < 20000; ++k) {
        s = step_plant(s, p, r, in, 3.7e-6, rng);
        ASSERT_GE(s.ramp_phase, 0.0);
        ASSERT_LT(s.ramp_phase, 1.0);
    }
}

TEST(LaserPlant, ModeHopFault) {
    PlantConfig p;
    Rng rng(7);
    auto s = initial_state(p);
    s.control_voltage = 16.0;  // -16 GHz
    EXPECT_THROW(step_plant(s, p, RampConfig{}, quiet_inputs(p), 1e-6, rng), ModeHopFault);
    s.control_voltage = 14.0;
    EXPECT_NO_THROW(step_plant(s, p, RampConfig{}, quiet_inputs(p), 1e-6, rng));
    EXPECT_THROW(step_plant(s, p, RampConfig{}, quiet_inputs(p), 0.0, rng), ValidationError);
}

TEST(LaserPlant, FrequencyNoiseZeroMean) {
    Rng rng(8);
    EXPECT_EQ(frequency_noise_sample(0.0, 1e-6, rng), 0.0);
    const double sigma = std::sqrt(0.5e6 / (2.0 * std::numbers::pi * 1e-6));
    const int n = 1000000;
    double sum = 0.0, sq = 0.0;
    for (int k = 0; k < n; ++k) {
        const double v = frequency_noise_sample(0.5e6, 1e-6, rng);
        sum += v;
        sq += v * v;
    }
    EXPECT_LT(std::abs(sum / n), 5.0 * sigma / std::sqrt(double(n)));
    EXPECT_NEAR(std::sqrt(sq / n) / sigma, 1.0, 0.01);
}

// Integrate the white frequency noise into phase, average periodograms of
// exp(i phi) and read the FWHM of the resulting line.
TEST(LaserPlant, IntegratedNoiseGivesConfiguredLinewidth) {
    const double linewidth = 0.5e6, dt = 1e-7;
    const int n = 1 << 15, segments = 48;
    Rng rng(9);
    std::vector<double> psd(n, 0.0);
    auto* buf = fftw_alloc_complex(n);
    fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    double phase = 0.0;
    for (int s = 0; s < segments; ++s) {
        for (int k = 0; k < n; ++k) {
            phase += 2.0 * std::numbers::pi * frequency_noise_sample(linewidth, dt, rng) * dt;
            buf[k][0] = std::cos(phase);
            buf[k][1] = std::sin(phase);
        }
        fftw_execute(plan);
        for (int k = 0; k < n; ++k) psd[k] += buf[k][0] * buf[k][0] + buf[k][1] * buf[k][1];
    }
    fftw_destroy_plan(plan);
    fftw_free(buf);

    // Frequencies of bin k: k/(n dt), wrapped. Smooth lightly against periodogram scatter.
    const double df = 1.0 / (n * dt);
    auto at = [&](int k) { return psd[static_cast<std::size_t>((k % n + n) % n)]; };
    auto smoothed = [&](int k) {
        double s = 0.0;
        for (int j = -4; j <= 4; ++j) s += at(k + j);
        return s / 9.0;
    };
    const double peak = smoothed(0);
    int up = 1, down = -1;
    while (smoothed(up) > 0.5 * peak) ++up;
    while (smoothed(down) > 0.5 * peak) --down;
    const double fwhm = (up - down) * df;
    EXPECT_NEAR(fwhm / linewidth, 1.0, 0.2) << fwhm;
}

TEST(LaserPlant, ConfigValidation) {
    PlantConfig p;
    p.k_current = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
    p = PlantConfig{};
    p.linewidth = -1.0;
    EXPECT_THROW(p.validate(), ValidationError);
    p = PlantConfig{};
    p.mode_hop_span = 0.0;
    EXPECT_THROW(p.validate(), ValidationError);
    RampConfig r;
    r.frequency = 0.0;
    EXPECT_THROW(r.validate(), ValidationError);
    EXPECT_EQ(parse_ramp_shape("sawtooth"), RampShape::Sawtooth);
    EXPECT_THROW(parse_ramp_shape("sine"), ParseError);
}
