#include <benchmark/benchmark.h>

#include "jointlca/rank_selection.hpp"
#include "jointlca/simulation.hpp"
#include "jointlca/solver.hpp"

using namespace jointlca;

namespace {

CrossCovarianceSet make_ccset(Eigen::Index n, std::vector<Eigen::Index> dims,
                              Eigen::Index r0, std::uint64_t seed) {
  SimConfig cfg;
  cfg.n = n;
  cfg.dims = std::move(dims);
  cfg.r0 = r0;
  cfg.seed = seed;
  auto [ds, truth] = generate(cfg);
  MultiviewDataset centered;
  centered.n = ds.n;
  for (const auto& v : ds.views) centered.views.push_back(center_columns(v));
  return cross_covariances(centered);
}

void BM_procrustes(benchmark::State& state) {
  const Eigen::Index p = state.range(0);
  Rng rng(3);
  Eigen::MatrixXd a(p, p), b(p / 2, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = rng.normal();
  for (Eigen::Index i = 0; i < p / 2; ++i)
    for (Eigen::Index j = 0; j < p; ++j) b(i, j) = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(orthogonal_procrustes(a, b));
}
BENCHMARK(BM_procrustes)->Arg(20)->Arg(50)->Arg(100);

void BM_fit_penalized(benchmark::State& state) {
  const Eigen::Index p = state.range(0);
  const CrossCovarianceSet cc = make_ccset(100, {p, p, p}, 2, 7);
  SolverOptions opts;
  for (auto _ : state) {
    auto [m, trace] = fit_penalized(cc, 0.1, p, opts);
    benchmark::DoNotOptimize(m);
  }
}
BENCHMARK(BM_fit_penalized)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_refit(benchmark::State& state) {
  const Eigen::Index p = state.range(0);
  const CrossCovarianceSet cc = make_ccset(100, {p, p, p}, 2, 11);
  SolverOptions opts;
  const JointLCAModel init = initialize(cc, 2);
  for (auto _ : state) {
    auto [m, trace] = refit(cc, 2, init, opts);
    benchmark::DoNotOptimize(m);
  }
}
BENCHMARK(BM_refit)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_generate(benchmark::State& state) {
  SimConfig cfg;
  cfg.n = 100;
  cfg.dims = {state.range(0), state.range(0), state.range(0)};
  cfg.r0 = 2;
  cfg.seed = 5;
  for (auto _ : state) {
    auto out = generate(cfg);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_generate)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_select_rank(benchmark::State& state) {
  SimConfig cfg;
  cfg.n = 100;
  cfg.dims = {30, 30, 30};
  cfg.r0 = 2;
  cfg.seed = 13;
  auto [ds, truth] = generate(cfg);
  RankSelectionOptions opts;
  opts.grid_size = 20;
  for (auto _ : state) {
    auto res = select_rank(ds, 30, opts);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_select_rank)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
