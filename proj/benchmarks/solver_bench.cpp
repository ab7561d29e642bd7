#include <benchmark/benchmark.h>

#include "gsmtl/datagen.hpp"
#include "gsmtl/solver.hpp"

using namespace gsmtl;

namespace {

SolverConfig bench_config(double mu, double lambda, int k) {
    SolverConfig config;
    config.hp.mu = mu;
    config.hp.lambda = lambda;
    config.hp.k = k;
    config.hp.outer_max_iter = 30;
    config.hp.inner_max_iter = 200;
    config.hp.outer_tol = 1e-4;
    config.hp.inner_tol = 1e-7;
    return config;
}

}  // namespace

static void BM_FitSynthetic1(benchmark::State& state) {
    Synthetic1Config cfg;
    cfg.seed = 11;
    const auto gen = gen_synthetic1(cfg);
    const SolverConfig config = bench_config(0.1, 0.01, 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(fit(gen.data, gen.task_groups, config));
}
BENCHMARK(BM_FitSynthetic1)->Unit(benchmark::kMillisecond);

static void BM_SStep(benchmark::State& state) {
    Synthetic1Config cfg;
    cfg.seed = 12;
    const auto gen = gen_synthetic1(cfg);
    const SolverConfig config = bench_config(0.1, 0.01, 3);
    const LatentModel model = init_L(gen.data, config.hp);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            solve_S_step(model.L, model.S, gen.data, gen.task_groups, config));
}
BENCHMARK(BM_SStep)->Unit(benchmark::kMillisecond);

static void BM_LStepDirect(benchmark::State& state) {
    Synthetic1Config cfg;
    cfg.seed = 13;
    const auto gen = gen_synthetic1(cfg);
    SolverConfig config = bench_config(0.1, 0.01, 3);
    config.l_step.method = LStepMethod::Direct;
    const LatentModel model = init_L(gen.data, config.hp);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_L_step(model.L, model.S, gen.data, config));
}
BENCHMARK(BM_LStepDirect)->Unit(benchmark::kMillisecond);

static void BM_LStepCG(benchmark::State& state) {
    Synthetic1Config cfg;
    cfg.seed = 13;
    const auto gen = gen_synthetic1(cfg);
    SolverConfig config = bench_config(0.1, 0.01, 3);
    config.l_step.method = LStepMethod::ConjugateGradient;
    const LatentModel model = init_L(gen.data, config.hp);
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_L_step(model.L, model.S, gen.data, config));
}
BENCHMARK(BM_LStepCG)->Unit(benchmark::kMillisecond);

static void BM_KMeansGroups(benchmark::State& state) {
    Synthetic1Config cfg;
    cfg.T = 30;
    cfg.seed = 14;
    const auto gen = gen_synthetic1(cfg);
    for (auto _ : state)
        benchmark::DoNotOptimize(kmeans_groups(gen.data, {3, 100, 10, 5}));
}
BENCHMARK(BM_KMeansGroups)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
