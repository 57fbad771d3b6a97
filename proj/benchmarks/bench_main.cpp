#include <benchmark/benchmark.h>

#include "sas/closed_loop.hpp"
#include "sas/config.hpp"
#include "sas/fit.hpp"
#include "sas/lock_servo.hpp"

using namespace sas;

namespace {

const ScenarioConfig& config() {
    static const auto cfg = load_config(SAS_DEFAULT_CONFIG);
    return cfg;
}

const LineTable& table() {
    static const auto t = load_line_data(SAS_DATA_FILE);
    return t;
}

void BM_SynthesizeSweep(benchmark::State& state) {
    auto spec = config().sweep;
    spec.samples = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(synthesize_sweep(table(), config().medium, spec, config().noise));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SynthesizeSweep)->Arg(4001)->Arg(34001);

void BM_PidStep(benchmark::State& state) {
    PidConfig c{.kp = 0.1, .ki = 1000.0, .kd = 1e-6, .derivative_smoothing = 4};
    auto st = make_pid_state(c);
    double e = 1e-3;
    for (auto _ : state) {
        e = -0.999 * e;
        benchmark::DoNotOptimize(pid_step(c, st, e, 1e-6));
    }
}
BENCHMARK(BM_PidStep);

void BM_ClosedLoop(benchmark::State& state) {
    const SpectrumModel model(table(), config().medium);
    const ErrorReadout readout(model, config().servo);
    Scenario s;
    s.duration_s = 0.01;
    s.log_every = 100;
    for (auto _ : state) benchmark::DoNotOptimize(closed_loop_run(config().loop(), readout, s, 1));
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_ClosedLoop)->Unit(benchmark::kMillisecond);

void BM_FitLorentzian(benchmark::State& state) {
    auto noise = config().noise;
    const auto trace = synthesize_sweep(table(), config().medium, SweepSpec{-153.3e6, -113.3e6, 401}, noise);
    for (auto _ : state) benchmark::DoNotOptimize(fit_lineshape(trace, LineModel::Lorentzian));
}
BENCHMARK(BM_FitLorentzian)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
