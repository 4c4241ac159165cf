#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "fracsl/forward.hpp"
#include "fracsl/inverse.hpp"
#include "fracsl/mittleff.hpp"
#include "fracsl/sl_core.hpp"

using namespace fracsl;

namespace {

PotentialSpec well() {
  return PotentialSpec::sampled([](double x) { return x < 0.5 ? -0.8 * (1 - 2 * x) * (1 - 2 * x) : 0.0; });
}

void BM_EigenSystem(benchmark::State& state) {
  const auto q = well();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sl::eigen_system(q, {0.5, 1.0}, n));
}
BENCHMARK(BM_EigenSystem)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_MittagLeffler(benchmark::State& state) {
  const double z = -static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ml::ml(0.5, 0.5, z));
}
BENCHMARK(BM_MittagLeffler)->Arg(1)->Arg(10)->Arg(100);

void BM_MittagLefflerTabulated(benchmark::State& state) {
  const double z = -static_cast<double>(state.range(0));
  ml::ml_tabulated(0.5, 0.5, z);
  for (auto _ : state) benchmark::DoNotOptimize(ml::ml_tabulated(0.5, 0.5, z));
}
BENCHMARK(BM_MittagLefflerTabulated)->Arg(1)->Arg(10)->Arg(100);

void BM_SolveSpectral(benchmark::State& state) {
  const auto es = sl::eigen_system(well(), {0.5, 1.0}, 63);
  const int nt = static_cast<int>(state.range(0));
  const auto eta = fwd::DriveSignal::sampled([](double t) { return t * t; }, 1.0, nt);
  const std::vector<double> x{0.25, 0.6, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(fwd::solve_spectral(es, 0.5, eta, x, eta.t()));
}
BENCHMARK(BM_SolveSpectral)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_SolveL1Fd(benchmark::State& state) {
  const auto q = well();
  const int n = static_cast<int>(state.range(0));
  const auto eta = fwd::DriveSignal::sampled([](double t) { return t * t; }, 1.0, 2 * n);
  for (auto _ : state) benchmark::DoNotOptimize(fwd::solve_l1_fd(q, {0.5, 1.0}, 0.5, eta, n, 2 * n));
}
BENCHMARK(BM_SolveL1Fd)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  inv::InverseProblemSpec spec;
  spec.q_tail = PotentialSpec::constant(0.0, 256);
  spec.eta = fwd::DriveSignal::sampled([](double t) { return std::sin(20 * t * t); }, 1.0, 256);
  for (int k = 1; k <= 256; ++k) spec.data.t.push_back(k / 256.0);
  spec.data.u.assign(256, 0.0);
  const inv::CandidateParam c{{0.3, 0.1, 0.05, 0.0, 0.0, 0.0, 0.0, 0.0}, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(inv::predict(c, spec));
}
BENCHMARK(BM_Predict)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
