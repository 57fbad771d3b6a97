#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sas/error.hpp"
#include "sas/lineshape.hpp"
#include "sas/spectrum.hpp"
#include "test_support.hpp"

using namespace sas;
using sas::test::bundled_table;

namespace {

const NoiseConfig kQuiet{false, 0.0, 0};
const Interval kF2Window{-700e6, 300e6};

SweepTrace f2_trace(const MediumConfig& medium = {}, double step = 0.1e6) {
    const auto n = static_cast<std::size_t>(std::llround((kF2Window.hi - kF2Window.lo) / step)) + 1;
    return synthesize_sweep(bundled_table(), medium, SweepSpec{kF2Window.lo, kF2Window.hi, n}, kQuiet);
}

LineTable single_line_table(double detuning) {
    LineTable t;
    t.carrier_hz = 384.23e12;
    t.isotopes = {{IsotopeId::Rb87, 1.0, 1.443160648e-25}};
    t.lines = {{IsotopeId::Rb87, 2, "F'=3", detuning, 0.4375, 6.0666e6, false}};
    return t;
}

// Trace with hand-placed Doppler valley and sub-Doppler peaks: A = 1,
// floor B = 0.6 under co(2,3), hyperfine peaks of prominence 0.05 and a
// crossover reaching 0.75.
SweepTrace constructed_trace() {
    const auto& t = bundled_table();
    const double co = find_feature(t, FeatureRef::parse("Rb87:F=2:co(2,3)")).detuning_hz;
    const double f3 = find_feature(t, FeatureRef::parse("Rb87:F=2:F'=3")).detuning_hz;
    const double f2 = find_feature(t, FeatureRef::parse("Rb87:F=2:F'=2")).detuning_hz;
    SweepTrace tr;
    const std::size_t n = 30001;
    for (std::size_t i = 0; i < n; ++i) {
        const double nu = -1.5e9 + 3.0e9 * static_cast<double>(i) / static_cast<double>(n - 1);
        const double valley = 1.0 - 0.4 * doppler_gaussian_unit_peak(nu, {co, 400e6});
        const double peaks = 0.05 * lorentzian(nu, {f3, 1e6}) + 0.05 * lorentzian(nu, {f2, 1e6}) +
                             0.15 * lorentzian(nu, {co, 1e6});
        tr.detuning_hz.push_back(nu);
        tr.reference_v.push_back(valley);
        tr.probe_v.push_back(valley + peaks);
        tr.differential_v.push_back(peaks);
    }
    return tr;
}

}  // namespace

TEST(Spectrum, NoSaturationMeansNoDips) {
    MediumConfig m;
    m.saturation_s = 0.0;
    const auto tr = f2_trace(m, 1e6);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        EXPECT_EQ(tr.probe_v[i], tr.reference_v[i]);
        EXPECT_EQ(tr.differential_v[i], 0.0);
    }
}

TEST(Spectrum, SingleLineSingleExtremum) {
    const double d = 12.345e6;
    const auto tr = synthesize_sweep(single_line_table(d), MediumConfig{}, SweepSpec{-500e6, 500e6, 10001}, kQuiet);
    std::vector<std::size_t> maxima;
    for (std::size_t i = 1; i + 1 < tr.size(); ++i) {
        const auto& y = tr.differential_v;
        if ((y[i] > y[i - 1] && y[i] >= y[i + 1]) || (y[i] < y[i - 1] && y[i] <= y[i + 1])) maxima.push_back(i);
    }
    ASSERT_EQ(maxima.size(), 1u);
    EXPECT_LE(std::abs(tr.detuning_hz[maxima[0]] - d), 0.1e6 + 1.0);
}

TEST(Spectrum, Rb87ValleyBelowRb85Valley) {
    const auto tr = synthesize_sweep(bundled_table(), MediumConfig{}, SweepSpec{-1e9, 2.5e9, 7001}, kQuiet);
    auto valley_at = [&](double lo, double hi) {
        std::size_t best = tr.size();
        for (std::size_t i = 0; i < tr.size(); ++i)
            if (tr.detuning_hz[i] >= lo && tr.detuning_hz[i] <= hi && (best == tr.size() || tr.reference_v[i] < tr.reference_v[best]))
                best = i;
        return tr.detuning_hz[best];
    };
    EXPECT_LT(valley_at(-1e9, 500e6), valley_at(500e6, 2.5e9));
}

TEST(Spectrum, ProbeNeverBelowReferenceWithoutNoise) {
    sas::test::Gen g(11);
    for (int trial = 0; trial < 20; ++trial) {
        MediumConfig m;
        m.saturation_s = g.log_uniform(1e-3, 20.0);
        m.peak_optical_depth = g.log_uniform(0.05, 5.0);
        m.dip_contrast = g.uniform(0.0, 1.0);
        m.crossover_enhancement = g.uniform(0.5, 3.0);
        m.temperature_k = g.uniform(280.0, 400.0);
        const auto tr = synthesize_sweep(bundled_table(), m, SweepSpec{-1e9, 7.5e9, 4001}, kQuiet);
        for (std::size_t i = 0; i < tr.size(); ++i) {
            ASSERT_GE(tr.probe_v[i], tr.reference_v[i]);
            ASSERT_GE(tr.differential_v[i], 0.0);
            ASSERT_LE(tr.probe_v[i], 1.0);
            ASSERT_GE(tr.reference_v[i], 0.0);
        }
    }
}

TEST(Spectrum, DoublingOpticalDepthNeverRaisesReference) {
    sas::test::Gen g(12);
    for (int trial = 0; trial < 20; ++trial) {
        MediumConfig m;
        m.peak_optical_depth = g.log_uniform(0.05, 5.0);
        MediumConfig m2 = m;
        m2.peak_optical_depth *= 2.0;
        const SpectrumModel a(bundled_table(), m), b(bundled_table(), m2);
        for (int k = 0; k < 200; ++k) {
            const double nu = g.uniform(-1.5e9, 8e9);
            EXPECT_LE(b.transmission(nu).reference, a.transmission(nu).reference);
        }
    }
}

TEST(Spectrum, DeterministicGivenSeed) {
    const SweepSpec s{-1e9, 7.5e9, 2001};
    const NoiseConfig n1{true, 0.002, 42}, n2{true, 0.002, 43};
    const auto a = synthesize_sweep(bundled_table(), MediumConfig{}, s, n1);
    const auto b = synthesize_sweep(bundled_table(), MediumConfig{}, s, n1);
    const auto c = synthesize_sweep(bundled_table(), MediumConfig{}, s, n2);
    EXPECT_EQ(a.probe_v, b.probe_v);
    EXPECT_EQ(a.reference_v, b.reference_v);
    EXPECT_NE(a.probe_v, c.probe_v);
    const auto q1 = synthesize_sweep(bundled_table(), MediumConfig{}, s, kQuiet);
    const auto q2 = synthesize_sweep(bundled_table(), MediumConfig{}, s, kQuiet);
    EXPECT_EQ(q1.differential_v, q2.differential_v);
    // Reference and probe noise are independent streams.
    double corr = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        corr += (a.reference_v[i] - q1.reference_v[i]) * (a.probe_v[i] - q1.probe_v[i]);
    EXPECT_LT(std::abs(corr / static_cast<double>(a.size())), 0.2 * 0.002 * 0.002);
}

TEST(Spectrum, RejectsBadSweeps) {
    EXPECT_THROW(synthesize_sweep(bundled_table(), MediumConfig{}, SweepSpec{1e9, -1e9, 100}, kQuiet), ValidationError);
    EXPECT_THROW(synthesize_sweep(bundled_table(), MediumConfig{}, SweepSpec{-1e9, 1e9, 8}, kQuiet), ValidationError);
    EXPECT_THROW(synthesize_sweep(LineTable{}, MediumConfig{}, SweepSpec{}, kQuiet), ValidationError);
    MediumConfig bad;
    bad.temperature_k = -1.0;
    EXPECT_THROW(SpectrumModel(bundled_table(), bad), ValidationError);
}

TEST(Spectrum, FeatureCensusIsSix) {
    const auto tr = f2_trace();
    EXPECT_EQ(count_sub_doppler_extrema(tr, kF2Window), 6u);
}

TEST(Spectrum, CensusMatchesFeatureCountPerManifold) {
    const SpectrumModel model(bundled_table(), MediumConfig{});
    for (const auto& m : manifolds(bundled_table())) {
        const Interval w{m.direct.front().detuning_hz - 150e6, m.direct.back().detuning_hz + 150e6};
        const auto n = static_cast<std::size_t>(std::llround((w.hi - w.lo) / 0.1e6)) + 1;
        const auto tr = synthesize_sweep(model, SweepSpec{w.lo, w.hi, n}, kQuiet);
        const auto features = m.direct.size() * (m.direct.size() + 1) / 2;
        // 85Rb F=2 has F'=1/F'=2 only 29 MHz apart, inside the 10.5 MHz-wide dips' reach.
        if (m.isotope == IsotopeId::Rb85 && m.f_ground == 2) continue;
        EXPECT_EQ(count_sub_doppler_extrema(tr, w), features) << to_string(m.isotope) << " F=" << m.f_ground;
    }
}

TEST(Spectrum, MarkersRecoveredFromConstructedTrace) {
    const auto tr = constructed_trace();
    MarkerOptions o;
    o.doppler_windows = {kF2Window};
    o.median_window_hz = 50e6;
    o.search_halfwidth_hz = 10e6;
    const auto m = extract_markers(tr, bundled_table(), kF2Window, MarkerSelection::defaults(), o);
    EXPECT_NEAR(m.a, 1.0, 0.01);
    EXPECT_NEAR(m.b, 0.6, 0.006);
    EXPECT_NEAR(m.c, 0.55, 0.0055);
    EXPECT_NEAR(m.d, 0.75, 0.0075);
}

TEST(Spectrum, DepthMetricArithmetic) {
    const auto d = depth_metrics({1.0, 0.6, 0.55, 0.75});
    EXPECT_NEAR(d.doppler_depth, 40.0, 1e-12);
    EXPECT_NEAR(d.hyperfine_depth, 5.0, 1e-12);
    EXPECT_NEAR(d.crossover_depth, 15.0, 1e-12);
    const auto flat = depth_metrics({0.7, 0.7, 0.7, 0.7});
    EXPECT_EQ(flat.doppler_depth, 0.0);
    EXPECT_EQ(flat.hyperfine_depth, 0.0);
    EXPECT_EQ(flat.crossover_depth, 0.0);
    EXPECT_THROW(depth_metrics({0.0, 0.1, 0.1, 0.1}), ValidationError);
    sas::test::Gen g(3);
    for (int i = 0; i < 1000; ++i) {
        const DepthMarkers m{g.uniform(0.5, 2), g.uniform(0, 1), g.uniform(0, 1), g.uniform(0, 1)};
        const double k = g.log_uniform(1e-3, 1e3);
        const auto a = depth_metrics(m), b = depth_metrics({k * m.a, k * m.b, k * m.c, k * m.d});
        EXPECT_NEAR(a.doppler_depth, b.doppler_depth, 1e-9);
        EXPECT_NEAR(a.hyperfine_depth, b.hyperfine_depth, 1e-9);
        EXPECT_NEAR(a.crossover_depth, b.crossover_depth, 1e-9);
    }
}

TEST(Spectrum, NoSaturationReportsNoFeatures) {
    MediumConfig m;
    m.saturation_s = 0.0;
    const SpectrumModel model(bundled_table(), m);
    const auto tr = synthesize_sweep(model, SweepSpec{}, kQuiet);
    EXPECT_THROW(extract_markers(tr, bundled_table(), kF2Window, MarkerSelection::defaults(), default_marker_options(model)),
                 NoFeaturesError);
}

TEST(Spectrum, DefaultSimulationMarkers) {
    const SpectrumModel model(bundled_table(), MediumConfig{});
    const auto tr = synthesize_sweep(model, SweepSpec{}, NoiseConfig{});
    const auto m = extract_markers(tr, bundled_table(), kF2Window, MarkerSelection::defaults(), default_marker_options(model));
    EXPECT_GT(m.a, m.b);
    EXPECT_GT(m.d, m.b);
    const auto d = depth_metrics(m);
    EXPECT_GT(d.doppler_depth, 30.0);
    EXPECT_GT(d.hyperfine_depth, 2.5);
    EXPECT_GT(d.crossover_depth, 15.0);
}

TEST(Spectrum, MarkerErrors) {
    const SpectrumModel model(bundled_table(), MediumConfig{});
    const auto tr = synthesize_sweep(model, SweepSpec{}, kQuiet);
    auto sel = MarkerSelection::defaults();
    sel.crossover = FeatureRef::parse("Rb85:F=3:co(3,4)");
    EXPECT_THROW(extract_markers(tr, bundled_table(), kF2Window, sel, default_marker_options(model)), NotFoundError);
    EXPECT_THROW(extract_markers(tr, bundled_table(), {-2e9, 0}, MarkerSelection::defaults(), default_marker_options(model)),
                 ValidationError);
}

TEST(Spectrum, MovingFilters) {
    const std::vector<double> y{1, 5, 2, 8, 3, 9, 4};
    EXPECT_EQ(moving_median(y, 1), y);
    EXPECT_EQ(moving_median(y, 3), (std::vector<double>{1, 2, 5, 3, 8, 4, 4}));
    const auto avg = moving_average(y, 3);
    EXPECT_DOUBLE_EQ(avg[0], (1 + 1 + 5) / 3.0);
    EXPECT_DOUBLE_EQ(avg[3], (2 + 8 + 3) / 3.0);
    EXPECT_DOUBLE_EQ(avg[6], (9 + 4 + 4) / 3.0);
    EXPECT_THROW(moving_average(y, 2), ValidationError);
}

TEST(Spectrum, ErrorSignalModes) {
    const auto tr = synthesize_sweep(single_line_table(0.0), MediumConfig{}, SweepSpec{-100e6, 100e6, 2001}, kQuiet);
    EXPECT_EQ(error_signal(tr, ErrorMode::Differential, 5), tr.differential_v);
    const auto d = error_signal(tr, ErrorMode::Derivative, 5);
    ASSERT_EQ(d.size(), tr.size());
    // odd around the centre sample (index 1000)
    for (std::size_t k = 1; k < 900; ++k) EXPECT_NEAR(d[1000 + k], -d[1000 - k], 1e-9 * std::abs(d[1000 - k]) + 1e-18);
    std::size_t crossing = 0;
    for (std::size_t i = 900; i < 1100; ++i)
        if (d[i] > 0.0 && d[i + 1] <= 0.0) crossing = i;
    EXPECT_LE(std::abs(static_cast<long>(crossing) - 1000), 1);

    SweepTrace zero = tr;
    std::fill(zero.differential_v.begin(), zero.differential_v.end(), 0.0);
    for (double v : error_signal(zero, ErrorMode::Derivative, 5)) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(error_signal(tr, ErrorMode::Derivative, 4), ValidationError);
    EXPECT_THROW(error_signal(tr, ErrorMode::Derivative, 5001), ValidationError);
}
