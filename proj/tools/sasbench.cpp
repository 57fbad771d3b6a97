// sasbench: runs the spectroscopy and lock experiments from a scenario config.
//
// Exit codes: 0 all criteria pass, 1 a criterion failed, 2 config or usage
// error, 3 the run itself failed.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sas/error.hpp"
#include "sas/experiments.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kPass = 0, kCriterionFailed = 1, kConfigError = 2, kRunFailed = 3;

fs::path default_config() {
    std::vector<fs::path> candidates;
    if (const char* dir = std::getenv("SAS_CONFIG_DIR"); dir && *dir) candidates.emplace_back(fs::path(dir) / "default.cfg");
    candidates.emplace_back(fs::path(SAS_SOURCE_CONFIG_DIR) / "default.cfg");
    candidates.emplace_back(fs::path(SAS_INSTALL_CONFIG_DIR) / "default.cfg");
    for (const auto& c : candidates)
        if (fs::exists(c)) return c;
    throw sas::ConfigError("no config given and no default.cfg found (set SAS_CONFIG_DIR or pass --config)");
}

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "sas-out";
    std::string format = "json";
};

void print(const sas::ExperimentReport& r) {
    fmt::print("{} (seed {}, config {})\n", r.experiment, r.seed, r.config_hash);
    for (const auto& c : r.criteria)
        fmt::print("  {} {:<28} {:.6g} {} [{}]\n", c.passed ? "PASS" : "FAIL", c.name, c.measured, c.unit, c.requirement);
    for (const auto& n : r.notes) fmt::print("  note: {}\n", n);
}

void write_report(const sas::ExperimentReport& r, const Common& opt) {
    const fs::path dir = fs::path(opt.out) / r.experiment;
    fs::create_directories(dir);
    if (opt.format == "csv")
        sas::write_file(dir / "report.csv", sas::report_csv(r));
    else
        sas::write_file(dir / "report.json", sas::report_json(r));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Saturated absorption spectroscopy and laser lock simulator"};
    app.require_subcommand(1);
    Common opt;
    app.add_option("--config", opt.config, "scenario config (sas-config/1)");
    app.add_option("--seed", opt.seed, "override the config seed");
    app.add_option("--out", opt.out, "output directory")->capture_default_str();
    app.add_option("--format", opt.format, "report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "synthesize the sweep and extract depth markers");
    auto* lock = app.add_subcommand("lock", "acquire and hold the lock");
    auto* temp = app.add_subcommand("temp-step", "temperature step while locked");
    auto* fluo = app.add_subcommand("fluorescence", "fluorescence brightness vs detuning");
    auto* all = app.add_subcommand("all", "run sweep, lock, temp-step and fluorescence");
    auto* analyze = app.add_subcommand("analyze", "depth markers of a saved trace or scope export");

    std::string csv;
    sas::AnalyzeOptions aopt;
    std::string feature_a = aopt.calibration.feature_a.str(), feature_b = aopt.calibration.feature_b.str();
    analyze->add_option("csv", csv, "trace CSV")->required();
    analyze->add_option("--time-col", aopt.columns.time)->capture_default_str();
    analyze->add_option("--reference-col", aopt.columns.reference)->capture_default_str();
    analyze->add_option("--probe-col", aopt.columns.probe)->capture_default_str();
    analyze->add_option("--differential-col", aopt.columns.differential, "omit to use probe - reference");
    analyze->add_option("--feature-a", feature_a, "first calibration feature")->capture_default_str();
    analyze->add_option("--feature-b", feature_b, "second calibration feature")->capture_default_str();
    analyze->add_option("--separation", aopt.calibration.known_separation_hz, "known a-b separation in Hz (0: from table)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfigError;
    }

    sas::ScenarioConfig cfg;
    try {
        cfg = sas::load_config(opt.config.empty() ? default_config() : fs::path(opt.config));
        if (opt.seed) cfg.seed = cfg.noise.seed = *opt.seed;
        aopt.calibration.feature_a = sas::FeatureRef::parse(feature_a);
        aopt.calibration.feature_b = sas::FeatureRef::parse(feature_b);
    } catch (const sas::Error& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kConfigError;
    }

    using Runner = std::function<sas::ExperimentReport(const sas::ScenarioConfig&, const sas::OutputSpec&)>;
    std::vector<Runner> runs;
    if (sweep->parsed() || all->parsed()) runs.emplace_back(sas::run_sweep_experiment);
    if (lock->parsed() || all->parsed()) runs.emplace_back(sas::run_lock_experiment);
    if (temp->parsed() || all->parsed()) runs.emplace_back(sas::run_temp_step_experiment);
    if (fluo->parsed() || all->parsed()) runs.emplace_back(sas::run_fluorescence_experiment);
    if (analyze->parsed())
        runs.emplace_back([&](const sas::ScenarioConfig& c, const sas::OutputSpec& o) {
            return sas::run_analyze(csv, c, aopt, o);
        });

    bool passed = true;
    try {
        const sas::OutputSpec out{opt.out};
        for (const auto& run : runs) {
            const auto report = run(cfg, out);
            print(report);
            write_report(report, opt);
            passed = passed && report.passed();
        }
    } catch (const std::exception& e) {
        fmt::print(stderr, "run failed: {}\n", e.what());
        return kRunFailed;
    }
    return passed ? kPass : kCriterionFailed;
}
