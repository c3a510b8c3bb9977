#include <benchmark/benchmark.h>

#include "flownet/montecarlo.hpp"
#include "flownet/oracle.hpp"

using namespace flownet;

#ifndef FLOWNET_SCENARIO_DIR
#define FLOWNET_SCENARIO_DIR "scenarios"
#endif

namespace {

const Scenario& table2() {
  static const Scenario sc = load_scenario(std::string(FLOWNET_SCENARIO_DIR) + "/table2.json");
  return sc;
}

void bm_jacobi_path(benchmark::State& state) {
  const Scenario& sc = table2();
  const DemandModels models = sc.make_models(false);
  const SampleGrid grid = sc.sde_grid();
  const auto theta_cache = cache_theta(models.entry(0).jacobi.theta, grid);
  std::uint64_t run = 0;
  for (auto _ : state) {
    RandomStream rng = RandomStream::demand_stream(1, run++, 0);
    benchmark::DoNotOptimize(simulate_jacobi(models.entry(0).jacobi, grid, rng, theta_cache));
  }
  state.SetItemsProcessed(state.iterations() * grid.n_steps);
}
BENCHMARK(bm_jacobi_path);

void bm_jacobi_mean(benchmark::State& state) {
  const DemandModels models = table2().make_models(false);
  const JacobiParams& p = models.entry(0).jacobi;
  double t = 0.0;
  for (auto _ : state) {
    t += 1e-6;
    benchmark::DoNotOptimize(jacobi_mean(p, 0.0, 0.4, 1.0 + t));
  }
}
BENCHMARK(bm_jacobi_mean);

void bm_jacobi_second_moment(benchmark::State& state) {
  const DemandModels models = table2().make_models(false);
  const JacobiParams& p = models.entry(0).jacobi;
  double t = 0.0;
  for (auto _ : state) {
    t += 1e-6;
    benchmark::DoNotOptimize(jacobi_second_moment(p, 0.0, 0.4, 1.0 + t));
  }
}
BENCHMARK(bm_jacobi_second_moment);

void bm_transit_inversion(benchmark::State& state) {
  const Scenario& sc = table2();
  const Network net = sc.make_network(1);
  const TransitMap tmap(net, sc.horizon);
  double t = 0.0;
  for (auto _ : state) {
    t += 1e-6;
    benchmark::DoNotOptimize(tmap.node_arrival(0, 2, t));
  }
}
BENCHMARK(bm_transit_inversion);

void bm_engine_construction(benchmark::State& state) {
  const Scenario& sc = table2();
  const Network net = sc.make_network(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(SimulationEngine(net, sc.horizon, GridSpec{.dx = sc.dx}));
}
BENCHMARK(bm_engine_construction);

void bm_single_run(benchmark::State& state) {
  const Scenario& sc = table2();
  const Network net = sc.make_network(1);
  const SimulationEngine engine(net, sc.horizon, GridSpec{.dx = sc.dx});
  const DemandModels models = sc.make_models(false);
  const SampleGrid grid = sc.sde_grid();
  const UpdateSchedule sched = sc.make_schedule();
  const ControlPolicy policy{ModelSetting::MS2, sched};
  std::vector<std::vector<double>> paths;
  for (int s = 0; s < models.leaf_count(); ++s) {
    RandomStream rng = RandomStream::demand_stream(1, 0, static_cast<std::uint64_t>(s));
    paths.push_back(simulate_jacobi(models.entry(s).jacobi, grid, rng));
  }
  const ObservationSet obs = ObservationSet::from_paths(paths, grid, sched);
  for (auto _ : state)
    benchmark::DoNotOptimize(engine.run(models, policy, obs, paths, grid));
}
BENCHMARK(bm_single_run);

}  // namespace

BENCHMARK_MAIN();
