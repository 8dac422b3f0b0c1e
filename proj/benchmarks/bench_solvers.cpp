#include <benchmark/benchmark.h>

#include "ddsim/config.hpp"
#include "ddsim/nonlinear_poisson.hpp"
#include "ddsim/transient.hpp"
#include "ddsim/verify/decks.hpp"

namespace {

void BM_EquilibriumPoisson(benchmark::State& state) {
  auto config = ddsim::parse_config(ddsim::verify::shipped_deck("diode"));
  config.resolution.nx = static_cast<int>(state.range(0));
  const auto mesh = ddsim::build_mesh(config.device, config.resolution);
  for (auto _ : state) {
    auto eq = ddsim::equilibrium_state(config.device, mesh, config.models.f1, config.models.f2);
    benchmark::DoNotOptimize(eq.phi.data());
  }
}
BENCHMARK(BM_EquilibriumPoisson)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_GummelStep(benchmark::State& state) {
  const auto config = ddsim::parse_config(ddsim::verify::shipped_deck("diode"));
  const auto sim = ddsim::make_simulation(config);
  const auto s0 = ddsim::initial_state(sim, config);
  for (auto _ : state) {
    auto step = ddsim::gummel_step(sim, s0, 0.05, config.stepper);
    benchmark::DoNotOptimize(step.state.phi.data());
  }
}
BENCHMARK(BM_GummelStep)->Unit(benchmark::kMillisecond);

}  // namespace
