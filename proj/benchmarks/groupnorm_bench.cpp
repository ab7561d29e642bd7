#include <benchmark/benchmark.h>

#include <random>

#include "gsmtl/groupnorm.hpp"

using namespace gsmtl;

namespace {

Eigen::VectorXd random_vec(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = unif(rng);
    return v;
}

GroupStructure chain_groups(int n, int width, int overlap) {
    std::vector<std::vector<int>> groups;
    for (int lo = 0; lo < n; lo += width - overlap) {
        std::vector<int> g;
        for (int i = lo; i < std::min(lo + width, n); ++i) g.push_back(i);
        groups.push_back(std::move(g));
        if (lo + width >= n) break;
    }
    return GroupStructure(std::move(groups), n);
}

}  // namespace

static void BM_ProxDisjoint(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(1);
    const Eigen::VectorXd x = random_vec(rng, n);
    const GroupStructure groups = chain_groups(n, 5, 0);
    for (auto _ : state)
        benchmark::DoNotOptimize(prox_group_norm(x, groups, 0.5, 1e-10));
}
BENCHMARK(BM_ProxDisjoint)->Arg(30)->Arg(300);

static void BM_ProxOverlapping(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(2);
    const Eigen::VectorXd x = random_vec(rng, n);
    const GroupStructure groups = chain_groups(n, 6, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(prox_group_norm(x, groups, 0.5, 1e-9, 100000));
}
BENCHMARK(BM_ProxOverlapping)->Arg(30)->Arg(120);

static void BM_DykstraProjection(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(3);
    const Eigen::VectorXd x = random_vec(rng, n);
    const GroupBallSpec spec{chain_groups(n, 6, 2), 1.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(project_intersection(x, spec, 1e-9, 100000));
}
BENCHMARK(BM_DykstraProjection)->Arg(30)->Arg(120);

static void BM_GroupNormOverlapping(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(4);
    const Eigen::VectorXd x = random_vec(rng, n);
    const GroupStructure groups = chain_groups(n, 6, 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(group_norm(x, groups, 1e-9, 500000));
}
BENCHMARK(BM_GroupNormOverlapping)->Arg(30)->Arg(120);

BENCHMARK_MAIN();
