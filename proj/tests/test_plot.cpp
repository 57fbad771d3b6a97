#include <gtest/gtest.h>

#include <string>

#include "sas/error.hpp"
#include "sas/plot.hpp"
#include "sas/trace_io.hpp"
#include "test_support.hpp"

using namespace sas;

namespace {

std::size_t count(const std::string& s, const std::string& what) {
    std::size_t n = 0;
    for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + 1)) ++n;
    return n;
}

SweepTrace small_sweep() {
    const auto cfg = sas::test::default_config();
    return synthesize_sweep(sas::test::bundled_table(), cfg.medium, SweepSpec{-700e6, 300e6, 2001}, cfg.noise);
}

}  // namespace

TEST(Plot, TraceHasOnePolylinePerChannel) {
    const auto t = small_sweep();
    const auto features = all_features(sas::test::bundled_table(), 1.5);
    const auto svg = render_trace_svg(t, features, "F=2 manifold");
    EXPECT_TRUE(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    EXPECT_EQ(count(svg, "<polyline"), 3u);
    for (const char* ch : {"reference", "probe", "differential"})
        EXPECT_NE(svg.find(std::string("data-channel=\"") + ch + "\""), std::string::npos) << ch;
    EXPECT_NE(svg.find("F=2 manifold"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Plot, ByteIdenticalForIdenticalInput) {
    const auto t = small_sweep();
    EXPECT_EQ(render_trace_svg(t), render_trace_svg(small_sweep()));
    const auto dir = sas::test::scratch_dir("plot");
    emit_plot(t, dir / "a.svg");
    emit_plot(t, dir / "b.svg");
    EXPECT_EQ(read_file(dir / "a.svg"), read_file(dir / "b.svg"));
}

TEST(Plot, LogHasTwoPanels) {
    TimeSeriesLog log;
    for (int k = 0; k < 100; ++k) {
        log.t_s.push_back(k * 1e-3);
        log.detuning_hz.push_back(0.0);
        log.error_v.push_back(0.01 * (k % 7));
        log.control_v.push_back(-0.5 + 0.01 * k);
        log.temperature_k.push_back(298.15);
        log.phase.push_back(LockPhase::Locked);
    }
    const auto svg = render_log_svg(log, "lock");
    EXPECT_EQ(count(svg, "<polyline"), 2u);
}

TEST(Plot, RejectsEmptyInputAndBadPaths) {
    EXPECT_THROW(render_trace_svg(SweepTrace{}), ValidationError);
    EXPECT_THROW(render_log_svg(TimeSeriesLog{}), ValidationError);
    EXPECT_THROW(emit_plot(small_sweep(), "/proc/nonexistent/plot.svg"), Error);
}
