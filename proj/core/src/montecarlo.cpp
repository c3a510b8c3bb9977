#include "flownet/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "flownet/errors.hpp"

namespace flownet {

namespace {

int effective_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// per-run demand realizations: Jacobi paths always, OU paths (same normal
// draws) only when some variant needs them
struct RunPaths {
  std::vector<std::vector<double>> jacobi;
  std::vector<std::vector<double>> ou;
};

RunPaths simulate_run_paths(const DemandModels& jacobi_models, const DemandModels* ou_models,
                            const SampleGrid& grid,
                            const std::vector<std::vector<double>>& theta_caches,
                            const std::vector<std::vector<double>>& ou_theta_caches,
                            std::uint64_t seed, int run) {
  RunPaths out;
  const int leaves = jacobi_models.leaf_count();
  out.jacobi.resize(static_cast<std::size_t>(leaves));
  if (ou_models) out.ou.resize(static_cast<std::size_t>(leaves));
  for (int s = 0; s < leaves; ++s) {
    const auto node = static_cast<std::uint64_t>(s);
    const JacobiParams& p = jacobi_models.entry(s).jacobi;
    RandomStream rng = RandomStream::demand_stream(seed, static_cast<std::uint64_t>(run), node);
    auto& path = out.jacobi[static_cast<std::size_t>(s)];
    path = simulate_jacobi(p, grid, rng, theta_caches[static_cast<std::size_t>(s)]);
    if (p.lo != 0.0 || p.hi != 1.0)
      for (double& z : path) z = p.lo + (p.hi - p.lo) * z;  // shift to the demand range
    if (ou_models) {
      RandomStream rng_ou = RandomStream::demand_stream(seed, static_cast<std::uint64_t>(run), node);
      out.ou[static_cast<std::size_t>(s)] = simulate_ou(
          ou_models->entry(s).ou, grid, rng_ou, ou_theta_caches[static_cast<std::size_t>(s)]);
    }
  }
  return out;
}

std::vector<std::vector<double>> model_theta_caches(const DemandModels& models,
                                                    const SampleGrid& grid) {
  std::vector<std::vector<double>> caches;
  for (int s = 0; s < models.leaf_count(); ++s) {
    const DemandModels::Entry& e = models.entry(s);
    caches.push_back(cache_theta(e.is_ou ? e.ou.theta : e.jacobi.theta, grid));
  }
  return caches;
}

}  // namespace

std::vector<VariantResult> monte_carlo_multi(const Scenario& sc, std::span<const Variant> variants,
                                             int n_runs, std::uint64_t seed, int n_threads) {
  if (variants.empty()) return {};
  const SampleGrid grid = sc.sde_grid();
  const DemandModels jacobi_models = sc.make_models(false);
  const bool any_ou = std::any_of(variants.begin(), variants.end(),
                                  [](const Variant& v) { return v.ou; });
  DemandModels ou_models = any_ou ? sc.make_models(true) : jacobi_models;

  const std::vector<std::vector<double>> theta_caches = model_theta_caches(jacobi_models, grid);
  const std::vector<std::vector<double>> ou_theta_caches =
      any_ou ? model_theta_caches(ou_models, grid) : std::vector<std::vector<double>>{};

  // one engine per damping profile in play
  std::map<int, Network> networks;
  std::map<int, SimulationEngine> engines;
  for (const Variant& v : variants) {
    if (engines.count(v.profile)) continue;
    auto [it, inserted] = networks.emplace(v.profile, sc.make_network(v.profile));
    engines.emplace(v.profile,
                    SimulationEngine(it->second, sc.horizon,
                                     GridSpec{.dx = sc.dx, .dt_common = sc.dt_common}));
  }
  const SimulationEngine& ref_engine = engines.begin()->second;
  const auto n_samples = static_cast<std::size_t>(ref_engine.sample_count()) + 1;
  const auto n_leaves = static_cast<std::size_t>(jacobi_models.leaf_count());
  const auto n_variants = variants.size();

  // accumulate sums of (D - f)^2 in run order so the result is bit-identical
  // for any worker count: workers fill per-run chunk slots, the main thread
  // reduces each chunk sequentially
  std::vector<std::vector<std::vector<double>>> sum_sq(
      n_variants, std::vector<std::vector<double>>(n_leaves, std::vector<double>(n_samples, 0.0)));

  const int threads = std::min(effective_threads(n_threads), n_runs);
  const int chunk = std::max(4 * threads, 8);
  std::vector<std::vector<std::vector<std::vector<double>>>> scratch(
      static_cast<std::size_t>(chunk),
      std::vector<std::vector<std::vector<double>>>(
          n_variants, std::vector<std::vector<double>>(n_leaves)));

  auto process_run = [&](int run, std::size_t slot) {
    const RunPaths paths = simulate_run_paths(jacobi_models, any_ou ? &ou_models : nullptr, grid,
                                              theta_caches, ou_theta_caches, seed, run);
    for (std::size_t vi = 0; vi < n_variants; ++vi) {
      const Variant& v = variants[vi];
      const auto& run_paths = v.ou ? paths.ou : paths.jacobi;
      const DemandModels& models = v.ou ? ou_models : jacobi_models;
      const ObservationSet obs = ObservationSet::from_paths(run_paths, grid, v.schedule);
      const ControlPolicy policy{v.setting, v.schedule};
      const Trajectory traj = engines.at(v.profile).run(models, policy, obs, run_paths, grid);
      for (std::size_t s = 0; s < n_leaves; ++s) {
        auto& dest = scratch[slot][vi][s];
        dest.resize(n_samples);
        for (std::size_t j = 0; j < n_samples; ++j) {
          const double gap = traj.demand[s][j] - traj.supply[s][j];
          dest[j] = gap * gap;
        }
      }
    }
  };

  for (int chunk_start = 0; chunk_start < n_runs; chunk_start += chunk) {
    const int chunk_end = std::min(chunk_start + chunk, n_runs);
    std::atomic<int> next{chunk_start};
    auto worker = [&] {
      for (int run = next.fetch_add(1); run < chunk_end; run = next.fetch_add(1))
        process_run(run, static_cast<std::size_t>(run - chunk_start));
    };
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    for (int run = chunk_start; run < chunk_end; ++run) {
      const auto slot = static_cast<std::size_t>(run - chunk_start);
      for (std::size_t vi = 0; vi < n_variants; ++vi)
        for (std::size_t s = 0; s < n_leaves; ++s) {
          const auto& src = scratch[slot][vi][s];
          auto& dst = sum_sq[vi][s];
          for (std::size_t j = 0; j < n_samples; ++j) dst[j] += src[j];
        }
    }
  }

  std::vector<double> times(n_samples);
  for (std::size_t j = 0; j < n_samples; ++j) times[j] = ref_engine.sample_time(static_cast<int>(j));

  std::vector<VariantResult> results(n_variants);
  for (std::size_t vi = 0; vi < n_variants; ++vi) {
    VariantResult& r = results[vi];
    r.label = variants[vi].label;
    r.setting = variants[vi].setting;
    r.profile = variants[vi].profile;
    r.ou = variants[vi].ou;
    r.n_runs = n_runs;
    r.seed = seed;
    r.mean_sq.resize(n_leaves);
    r.norm_rmse.resize(n_leaves);
    for (std::size_t s = 0; s < n_leaves; ++s) {
      r.mean_sq[s] = sum_sq[vi][s];
      for (double& x : r.mean_sq[s]) x /= static_cast<double>(n_runs);
      r.norm_rmse[s] = norm_rmse_from_mean_sq(r.mean_sq[s], times,
                                              ref_engine.first_arrival(static_cast<int>(s)),
                                              sc.horizon.T);
    }
  }
  return results;
}

ErrorReport monte_carlo(const Scenario& sc, int n_runs, std::uint64_t seed, int n_threads) {
  const auto start = std::chrono::steady_clock::now();
  Variant v{.label = setting_name(sc.setting),
            .setting = sc.setting,
            .profile = sc.damping_profile,
            .schedule = sc.make_schedule(),
            .ou = sc.ou_process};
  const auto results = monte_carlo_multi(sc, std::span(&v, 1), n_runs, seed, n_threads);
  const Network net = sc.make_network(1);
  ErrorReport report;
  for (std::size_t s = 0; s < results[0].norm_rmse.size(); ++s)
    report.rows.push_back(ErrorReportRow{sc.setting, net.demand_nodes()[s], sc.damping_profile,
                                         results[0].norm_rmse[s], n_runs, seed});
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

ErrorReport monte_carlo_full_table(const Scenario& sc, int n_runs, std::uint64_t seed,
                                   int n_threads) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Variant> variants;
  const UpdateSchedule schedule = sc.make_schedule();
  for (int profile : {1, 2})
    for (ModelSetting setting : {ModelSetting::MS1, ModelSetting::MS2, ModelSetting::MS3})
      variants.push_back(Variant{.label = std::string(setting_name(setting)) + "/mu" +
                                          std::to_string(profile),
                                 .setting = setting,
                                 .profile = profile,
                                 .schedule = setting == ModelSetting::MS1
                                                 ? UpdateSchedule::initial_only(sc.horizon.t0)
                                                 : schedule,
                                 .ou = sc.ou_process});
  const auto results = monte_carlo_multi(sc, variants, n_runs, seed, n_threads);
  const Network net = sc.make_network(1);
  ErrorReport report;
  for (const VariantResult& r : results)
    for (std::size_t s = 0; s < r.norm_rmse.size(); ++s)
      report.rows.push_back(ErrorReportRow{r.setting, net.demand_nodes()[s], r.profile,
                                           r.norm_rmse[s], n_runs, seed});
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

double norm_rmse_from_mean_sq(std::span<const double> mean_sq, std::span<const double> times,
                              double t_first, double T) {
  if (times.size() < 2) fail(Errc::EmptyWindow, "need at least two samples");
  if (t_first >= T) fail(Errc::EmptyWindow, "first arrival at or after the horizon end");
  const double dt = times[1] - times[0];
  const double t0 = times[0];
  const auto j0 = static_cast<std::size_t>(
      std::max(0.0, std::ceil((t_first - t0) / dt - 1e-9)));
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = j0; j < mean_sq.size() && times[j] <= T + 1e-12; ++j) {
    sum += std::sqrt(std::max(0.0, mean_sq[j]));
    ++count;
  }
  if (count == 0) fail(Errc::EmptyWindow, "no samples in the error window");
  return sum * dt / (T - t_first);
}

double norm_rmse(std::span<const std::vector<double>> supply_runs,
                 std::span<const std::vector<double>> demand_runs, std::span<const double> times,
                 double t_first, double T) {
  if (supply_runs.empty() || supply_runs.size() != demand_runs.size())
    fail(Errc::BadParameter, "need matching, non-empty supply/demand sample sets");
  std::vector<double> mean_sq(times.size(), 0.0);
  for (std::size_t r = 0; r < supply_runs.size(); ++r)
    for (std::size_t j = 0; j < times.size(); ++j) {
      const double gap = demand_runs[r][j] - supply_runs[r][j];
      mean_sq[j] += gap * gap;
    }
  for (double& x : mean_sq) x /= static_cast<double>(supply_runs.size());
  return norm_rmse_from_mean_sq(mean_sq, times, t_first, T);
}

ReductionStudy error_reduction_study(const Scenario& sc, std::span<const int> update_counts,
                                     int n_runs, std::uint64_t seed, int n_threads) {
  ReductionStudy study;
  study.leaves = sc.make_network(1).demand_nodes();
  study.update_counts.assign(update_counts.begin(), update_counts.end());

  std::vector<Variant> variants;
  variants.push_back(Variant{.label = "baseline",
                             .setting = ModelSetting::MS1,
                             .profile = sc.damping_profile,
                             .schedule = UpdateSchedule::initial_only(sc.horizon.t0)});
  for (int count : update_counts) {
    const UpdateSchedule schedule = sc.make_schedule(count);
    for (ModelSetting setting : {ModelSetting::MS2, ModelSetting::MS3})
      // zero updates is the baseline system itself: the reduction is 0 by
      // definition
      variants.push_back(Variant{.label = std::string(setting_name(setting)) + "/" +
                                          std::to_string(count),
                                 .setting = count <= 0 ? ModelSetting::MS1 : setting,
                                 .profile = sc.damping_profile,
                                 .schedule = schedule});
  }
  const auto results = monte_carlo_multi(sc, variants, n_runs, seed, n_threads);

  const auto n_leaves = study.leaves.size();
  study.baseline_rmse = results[0].norm_rmse;
  study.rmse.assign(2, {});
  study.reduction_pct.assign(2, {});
  for (std::size_t c = 0; c < update_counts.size(); ++c) {
    for (int m = 0; m < 2; ++m) {
      const VariantResult& r = results[1 + 2 * c + static_cast<std::size_t>(m)];
      std::vector<double> pct(n_leaves);
      for (std::size_t s = 0; s < n_leaves; ++s)
        pct[s] = 100.0 * (study.baseline_rmse[s] - r.norm_rmse[s]) / study.baseline_rmse[s];
      study.rmse[static_cast<std::size_t>(m)].push_back(r.norm_rmse);
      study.reduction_pct[static_cast<std::size_t>(m)].push_back(std::move(pct));
    }
  }
  return study;
}

OuComparisonResult ou_comparison(const Scenario& sc, int n_runs, std::uint64_t seed) {
  const SampleGrid grid = sc.sde_grid();
  const DemandModels jacobi_models = sc.make_models(false);
  const DemandModels ou_models = sc.make_models(true);
  const auto theta_caches = model_theta_caches(jacobi_models, grid);
  const auto ou_theta_caches = model_theta_caches(ou_models, grid);

  OuComparisonResult res;
  res.n_runs = n_runs;
  res.ou_min_value = std::numeric_limits<double>::infinity();
  for (int run = 0; run < n_runs; ++run) {
    const RunPaths paths = simulate_run_paths(jacobi_models, &ou_models, grid, theta_caches,
                                              ou_theta_caches, seed, run);
    for (int s = 0; s < jacobi_models.leaf_count(); ++s) {
      const auto& ou = paths.ou[static_cast<std::size_t>(s)];
      const auto& jac = paths.jacobi[static_cast<std::size_t>(s)];
      const double ou_min = *std::min_element(ou.begin(), ou.end());
      res.ou_min_value = std::min(res.ou_min_value, ou_min);
      if (ou_min < 0.0) ++res.ou_negative_paths;
      const JacobiParams& p = jacobi_models.entry(s).jacobi;
      const double lo = p.lo, hi = p.hi;
      for (double z : jac)
        if (z < lo - 1e-15 || z > hi + 1e-15) {
          ++res.jacobi_out_of_bounds;
          break;
        }
    }
  }
  return res;
}

Trajectory simulate_single_run(const Scenario& sc, int run_id, std::uint64_t seed) {
  const SampleGrid grid = sc.sde_grid();
  const DemandModels models = sc.make_models(sc.ou_process);
  const DemandModels jacobi_models = sc.make_models(false);
  const auto theta_caches = model_theta_caches(jacobi_models, grid);
  const auto ou_theta_caches =
      sc.ou_process ? model_theta_caches(models, grid) : std::vector<std::vector<double>>{};
  const RunPaths paths = simulate_run_paths(jacobi_models, sc.ou_process ? &models : nullptr,
                                            grid, theta_caches, ou_theta_caches, seed, run_id);
  const auto& run_paths = sc.ou_process ? paths.ou : paths.jacobi;
  const Network net = sc.make_network(sc.damping_profile);
  const SimulationEngine engine(net, sc.horizon, GridSpec{.dx = sc.dx, .dt_common = sc.dt_common});
  const UpdateSchedule schedule = sc.setting == ModelSetting::MS1
                                      ? UpdateSchedule::initial_only(sc.horizon.t0)
                                      : sc.make_schedule();
  const ObservationSet obs = ObservationSet::from_paths(run_paths, grid, schedule);
  return engine.run(models, ControlPolicy{sc.setting, schedule}, obs, run_paths, grid);
}

}  // namespace flownet
