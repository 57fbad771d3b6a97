#include <gtest/gtest.h>

#include <filesystem>

#include <json.hpp>

#include "sas/error.hpp"
#include "sas/experiments.hpp"
#include "test_support.hpp"

using namespace sas;

TEST(Experiments, FluorescenceProxyShape) {
    EXPECT_DOUBLE_EQ(fluorescence_proxy(0.0, 500e6), 1.0);
    EXPECT_NEAR(fluorescence_proxy(250e6, 500e6), 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(fluorescence_proxy(-100e6, 500e6), fluorescence_proxy(100e6, 500e6));
}

TEST(Experiments, SweepReportJson) {
    const auto cfg = sas::test::default_config();
    const auto r = run_sweep_experiment(cfg);
    EXPECT_TRUE(r.passed());
    const auto j = nlohmann::json::parse(report_json(r));
    EXPECT_EQ(j.at("format"), "sas-report/1");
    EXPECT_EQ(j.at("experiment"), "sweep");
    EXPECT_EQ(j.at("seed"), 1);
    EXPECT_EQ(j.at("config_hash"), config_hash(cfg));
    EXPECT_TRUE(j.at("passed").get<bool>());
    ASSERT_TRUE(j.at("criteria").is_array());
    for (const auto& c : j.at("criteria")) {
        EXPECT_TRUE(c.contains("name"));
        EXPECT_TRUE(c.contains("measured"));
        EXPECT_TRUE(c.contains("requirement"));
        EXPECT_TRUE(c.at("passed").is_boolean());
    }
    const auto csv = report_csv(r);
    EXPECT_TRUE(csv.starts_with("# format=sas-report/1\n"));
    EXPECT_NE(csv.find("\nkind,name,value,unit,requirement,passed\n"), std::string::npos);
}

TEST(Experiments, UnsaturatedSweepReportsNoFeatures) {
    auto cfg = sas::test::default_config();
    cfg.medium.saturation_s = 0.0;
    const auto r = run_sweep_experiment(cfg);
    EXPECT_FALSE(r.passed());
    bool noted = false;
    for (const auto& n : r.notes) noted = noted || n.find("no sub-Doppler features") != std::string::npos;
    EXPECT_TRUE(noted);
}

TEST(Experiments, ArtifactsAreReproducible) {
    const auto cfg = sas::test::default_config();
    const auto a = sas::test::scratch_dir("exp_a"), b = sas::test::scratch_dir("exp_b");
    const auto ra = run_sweep_experiment(cfg, {a});
    run_sweep_experiment(cfg, {b});
    ASSERT_FALSE(ra.artifacts.empty());
    for (const auto& rel : ra.artifacts) EXPECT_EQ(read_file(a / rel), read_file(b / rel)) << rel;
}

TEST(Experiments, ZeroTemperatureStepNeedsNoCorrection) {
    auto cfg = sas::test::default_config();
    cfg.temp_step.step_k = 0.0;
    cfg.temp_step.settle_s = 1.0;
    const auto r = run_temp_step_experiment(cfg);
    const auto* d = r.criterion("step_delta_control");
    ASSERT_NE(d, nullptr);
    EXPECT_TRUE(d->passed);
    EXPECT_NEAR(d->measured, 0.0, 0.01);
}

TEST(Experiments, InvertedPolarityNeverLocks) {
    auto cfg = sas::test::default_config();
    cfg.servo.invert_polarity = true;
    cfg.lock.duration_s = 0.3;
    cfg.lock.ramp_test_s = 0.0;
    const auto r = run_lock_experiment(cfg);
    const auto* c = r.criterion("reaches_locked");
    ASSERT_NE(c, nullptr);
    EXPECT_FALSE(c->passed);
}

TEST(Experiments, AnalyzeSavedSweep) {
    const auto cfg = sas::test::default_config();
    const auto dir = sas::test::scratch_dir("analyze");
    const auto sweep = run_sweep_experiment(cfg, {dir});
    const auto r = run_analyze(dir / "sweep" / "sweep.csv", cfg);
    EXPECT_TRUE(r.passed());
    for (const char* name : {"marker_a", "marker_b", "marker_c", "marker_d"}) {
        ASSERT_NE(r.value(name), nullptr) << name;
        ASSERT_NE(sweep.value(name), nullptr) << name;
        EXPECT_DOUBLE_EQ(r.value(name)->value, sweep.value(name)->value) << name;
    }
}
