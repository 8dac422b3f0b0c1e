#include <benchmark/benchmark.h>

#include <array>
#include <random>

#include "ddsim/recombination.hpp"
#include "ddsim/statistics.hpp"

namespace {

void BM_FermiDiracEval(benchmark::State& state) {
  const auto fd = ddsim::StatisticsModel::fermi_dirac_half();
  const double s = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fd.eval(s));
}
BENCHMARK(BM_FermiDiracEval)->Arg(-20)->Arg(-5)->Arg(0)->Arg(5)->Arg(40);

void BM_FermiDiracInvert(benchmark::State& state) {
  const auto fd = ddsim::StatisticsModel::fermi_dirac_half();
  const double u = fd.eval(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fd.invert(u));
}
BENCHMARK(BM_FermiDiracInvert)->Arg(-5)->Arg(0)->Arg(5);

void BM_Kappa(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::array<double, 3> e{u(rng), u(rng), u(rng)}, j{u(rng), u(rng), u(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(ddsim::kappa(e, j, 1.0));
}
BENCHMARK(BM_Kappa);

}  // namespace
