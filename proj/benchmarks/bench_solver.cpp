#include <random>

#include <benchmark/benchmark.h>

#include <tradegrowth/calibration.hpp>
#include <tradegrowth/gravity.hpp>
#include <tradegrowth/solver.hpp>

using namespace tradegrowth;

namespace {

ModelParams instance(Eigen::Index n, double tau, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> near_one(0.9, 1.1);
  std::uniform_real_distribution<double> noise(0.0, 0.05);
  ModelParams p;
  p.theta = 2.12;
  p.sigma = 0.76;
  p.alpha = 0.36;
  p.rho = 0.03;
  p.psi = 0.04;
  p.T = Vector(n);
  p.L = Vector(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.T[i] = near_one(rng);
    p.L[i] = near_one(rng);
  }
  p.tau = Matrix::Ones(n, n);
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index d = s + 1; d < n; ++d) p.tau(s, d) = p.tau(d, s) = tau * (1.0 + noise(rng));
  }
  return p;
}

void BM_SolveBgp(benchmark::State& state) {
  const ValidatedParams p = validate_params(instance(state.range(0), 2.0, 1));
  SolverConfig cfg;
  cfg.outer_method = state.range(1) == 0 ? OuterMethod::PseudoTransient : OuterMethod::Damped;
  long outer = 0;
  for (auto _ : state) {
    try {
      const SolveResult r = solve_bgp(p, cfg);
      outer = r.trace.outer_iterations;
      benchmark::DoNotOptimize(r.eq.g);
    } catch (const Error& e) {
      state.SkipWithError(e.what());
      break;
    }
  }
  state.counters["outer_iterations"] = static_cast<double>(outer);
}
BENCHMARK(BM_SolveBgp)
    ->ArgNames({"N", "damped"})
    ->ArgsProduct({{2, 4, 8, 16, 32}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

void BM_WageLoop(benchmark::State& state) {
  const ValidatedParams p = validate_params(instance(state.range(0), 2.0, 2));
  const Vector M = Vector::Constant(p.n(), 1.0 / static_cast<double>(p.n()));
  for (auto _ : state) benchmark::DoNotOptimize(mid_wage_fixed_point(p, M, {}).w);
}
BENCHMARK(BM_WageLoop)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_HeadRies(benchmark::State& state) {
  const ValidatedParams p = validate_params(instance(state.range(0), 2.0, 3));
  const FlowTable flows = final_goods_flows(p, solve_bgp(p).eq);
  for (auto _ : state) benchmark::DoNotOptimize(head_ries_costs(flows, p.theta(), p.alpha()).tau);
}
BENCHMARK(BM_HeadRies)->Arg(8)->Arg(64)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
