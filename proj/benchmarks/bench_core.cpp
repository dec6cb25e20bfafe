#include <benchmark/benchmark.h>

#include "sarcf/counterfact.hpp"
#include "sarcf/dgp.hpp"
#include "sarcf/mcharness.hpp"
#include "sarcf/netgen.hpp"
#include "sarcf/sarfit.hpp"

namespace {

using namespace sarcf;

struct Fixture {
    UnitCharacteristics chars;
    InteractionMatrix w;
    StructuralParams params;
    Population pop;

    explicit Fixture(Eigen::Index n) {
        chars = draw_characteristics(n, 2, 1, 42);
        w = build_weights(chars, NetworkParams{});
        params.gamma = Eigen::VectorXd::Constant(1, 0.5);
        pop = generate_population(chars, w, params, AssignmentSpec{}, 1);
    }
};

const Fixture& fixture(Eigen::Index n) {
    static const Fixture f200(200);
    static const Fixture f500(500);
    return n == 200 ? f200 : f500;
}

void BM_BuildWeights(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    const UnitCharacteristics chars = draw_characteristics(n, 2, 1, 42);
    for (auto _ : state) benchmark::DoNotOptimize(build_weights(chars, NetworkParams{}));
}

void BM_SpectralRadius(benchmark::State& state) {
    const Fixture& f = fixture(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(spectral_radius(f.w.w));
}

void BM_SolveEquilibrium(benchmark::State& state) {
    const Fixture& f = fixture(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(
            solve_equilibrium(f.w, f.params, f.pop.d, f.chars.econ, f.pop.eps));
}

void BM_CounterfactualReport(benchmark::State& state) {
    const Fixture& f = fixture(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(report(f.w, f.params));
}

void BM_FitSarMl(benchmark::State& state) {
    const Fixture& f = fixture(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_sar_ml(f.pop.y, f.pop.d, f.chars.econ, f.w));
}

void BM_FitSarMlSharedSpectrum(benchmark::State& state) {
    const Fixture& f = fixture(state.range(0));
    const LogDetSpectrum spectrum(f.w.w);
    for (auto _ : state)
        benchmark::DoNotOptimize(fit_sar_ml(f.pop.y, f.pop.d, f.chars.econ, f.w, spectrum));
}

void BM_FitOls(benchmark::State& state) {
    const Fixture& f = fixture(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(fit_ols(f.pop.y, f.pop.d, f.chars.econ));
}

void BM_Replication(benchmark::State& state) {
    ExperimentConfig cfg = default_config();
    cfg.n_units = state.range(0);
    cfg.n_reps = 1;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        cfg.seed = seed++;
        benchmark::DoNotOptimize(run_experiment(cfg));
    }
}

} // namespace

BENCHMARK(BM_BuildWeights)->Arg(200)->Arg(500);
BENCHMARK(BM_SpectralRadius)->Arg(200)->Arg(500);
BENCHMARK(BM_SolveEquilibrium)->Arg(200)->Arg(500);
BENCHMARK(BM_CounterfactualReport)->Arg(200)->Arg(500);
BENCHMARK(BM_FitSarMl)->Arg(200)->Arg(500);
BENCHMARK(BM_FitSarMlSharedSpectrum)->Arg(200)->Arg(500);
BENCHMARK(BM_FitOls)->Arg(200)->Arg(500);
BENCHMARK(BM_Replication)->Arg(200);

BENCHMARK_MAIN();
