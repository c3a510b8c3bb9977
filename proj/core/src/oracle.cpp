#include "flownet/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "flownet/errors.hpp"

namespace flownet {

namespace {

struct WindowedMoments {
  // per leaf slot: window sample indices [j0, j1] and m1/m2 at each sample
  std::vector<std::size_t> j0, j1;
  std::vector<std::vector<double>> m1, m2;
};

WindowedMoments leaf_moments(const Scenario& sc, const SimulationEngine& engine) {
  const DemandModels models = sc.make_models(false);
  const double T = sc.horizon.T;
  WindowedMoments wm;
  const int leaves = models.leaf_count();
  wm.j0.resize(static_cast<std::size_t>(leaves));
  wm.j1.resize(static_cast<std::size_t>(leaves));
  wm.m1.resize(static_cast<std::size_t>(leaves));
  wm.m2.resize(static_cast<std::size_t>(leaves));
  for (int s = 0; s < leaves; ++s) {
    const double t_first = engine.first_arrival(s);
    const double dt = engine.dt_common();
    const auto j0 = static_cast<std::size_t>(
        std::max(0.0, std::ceil((t_first - sc.horizon.t0) / dt - 1e-9)));
    const auto j1 = static_cast<std::size_t>(engine.sample_count());
    wm.j0[static_cast<std::size_t>(s)] = j0;
    wm.j1[static_cast<std::size_t>(s)] = j1;
    const JacobiParams& p = models.entry(s).jacobi;
    const double observed = models.initial_value(s);
    auto& m1 = wm.m1[static_cast<std::size_t>(s)];
    auto& m2 = wm.m2[static_cast<std::size_t>(s)];
    m1.resize(j1 + 1, 0.0);
    m2.resize(j1 + 1, 0.0);
    for (std::size_t j = j0; j <= j1; ++j) {
      const double t = engine.sample_time(static_cast<int>(j));
      if (t > T + 1e-12) break;
      m1[j] = jacobi_mean_in_range(p, sc.horizon.t0, observed, t);
      m2[j] = jacobi_m2_in_range(p, sc.horizon.t0, observed, t);
    }
  }
  return wm;
}

double objective_of_supply(const SimulationEngine& engine, const WindowedMoments& wm,
                           const std::vector<std::vector<double>>& supply) {
  const double dt = engine.dt_common();
  double total = 0.0;
  for (std::size_t s = 0; s < supply.size(); ++s)
    for (std::size_t j = wm.j0[s]; j <= wm.j1[s] && j < supply[s].size(); ++j) {
      const double f = supply[s][j];
      total += dt * (wm.m2[s][j] - 2.0 * f * wm.m1[s][j] + f * f);
    }
  return total;
}

}  // namespace

double deterministic_objective(const Scenario& sc, const SimulationEngine& engine,
                               const Trajectory& traj) {
  const WindowedMoments wm = leaf_moments(sc, engine);
  return objective_of_supply(engine, wm, traj.supply);
}

Trajectory explicit_control_trajectory(const Scenario& sc, const SimulationEngine& engine) {
  const DemandModels models = sc.make_models(false);
  const ControlPolicy policy{ModelSetting::MS1, UpdateSchedule::initial_only(sc.horizon.t0)};
  const ObservationSet obs = ObservationSet::initial_only(models);
  return engine.run(models, policy, obs, {}, sc.sde_grid());
}

OracleResult oracle_control_optimizer(const Scenario& sc, int profile, int n_intervals,
                                      double stationarity_tol, int max_sweeps) {
  if (n_intervals < 1 || n_intervals > 200)
    fail(Errc::BadParameter, "oracle control grid must have 1..200 intervals");
  const Network net = sc.make_network(profile);
  const SimulationEngine engine(net, sc.horizon, GridSpec{.dx = sc.dx, .dt_common = sc.dt_common});
  const TransitMap& tmap = engine.transit();
  const DemandModels models = sc.make_models(false);
  const ControlPolicy policy{ModelSetting::MS1, UpdateSchedule::initial_only(sc.horizon.t0)};
  const ObservationSet obs = ObservationSet::initial_only(models);
  const SampleGrid grid = sc.sde_grid();

  // controls injected after t_end deliver past the horizon at every leaf and
  // cannot affect the objective; the grid ends there
  double t_end = sc.horizon.T;
  for (NodeId leaf : net.demand_nodes())
    t_end = std::min(t_end, tmap.injection_time(net.source(), leaf, sc.horizon.T));

  OracleResult res;
  const auto m = static_cast<std::size_t>(n_intervals);
  res.grid_times.resize(m + 1);
  const double h = (t_end - sc.horizon.t0) / static_cast<double>(n_intervals);
  for (std::size_t k = 0; k <= m; ++k)
    res.grid_times[k] = sc.horizon.t0 + h * static_cast<double>(k);

  // unit basis responses through the PDE forward map; the last cell is
  // closed on the right so the injection at t_end (delivering exactly at T)
  // belongs to a coordinate
  const WindowedMoments wm = leaf_moments(sc, engine);
  std::vector<std::vector<std::vector<double>>> response(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double a = res.grid_times[k];
    const double b = res.grid_times[k + 1] + (k + 1 == m ? 1e-9 : 0.0);
    const std::function<double(double)> basis = [a, b](double t) {
      return (t >= a && t < b) ? 1.0 : 0.0;
    };
    response[k] = engine.run(models, policy, obs, {}, grid, &basis).supply;
  }

  // exact quadratic objective: c + b.u + u.A u
  const double dt = engine.dt_common();
  std::vector<std::vector<double>> A(m, std::vector<double>(m, 0.0));
  std::vector<double> b_lin(m, 0.0);
  double c0 = 0.0;
  const auto n_leaves = wm.m1.size();
  for (std::size_t s = 0; s < n_leaves; ++s)
    for (std::size_t j = wm.j0[s]; j <= wm.j1[s]; ++j) {
      c0 += dt * wm.m2[s][j];
      for (std::size_t k = 0; k < m; ++k) {
        const double rk = response[k][s][j];
        if (rk == 0.0) continue;
        b_lin[k] += dt * (-2.0) * wm.m1[s][j] * rk;
        for (std::size_t l = 0; l <= k; ++l) A[k][l] += dt * rk * response[l][s][j];
      }
    }
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = k + 1; l < m; ++l) A[k][l] = A[l][k];

  std::vector<double> u(m, 0.0);
  auto gradient = [&](std::size_t k) {
    double g = b_lin[k];
    for (std::size_t l = 0; l < m; ++l) g += 2.0 * A[k][l] * u[l];
    return g;
  };

  res.converged = false;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t k = 0; k < m; ++k) {
      if (A[k][k] <= 1e-14) continue;  // response outside the window
      const double g = gradient(k);
      u[k] = std::max(0.0, u[k] - g / (2.0 * A[k][k]));
    }
    double stat = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (A[k][k] <= 1e-14) continue;
      const double g = gradient(k);
      const double pg = u[k] > 0.0 ? g : std::min(g, 0.0);
      stat = std::max(stat, std::abs(pg));
    }
    res.sweeps = sweep + 1;
    res.stationarity = stat;
    if (stat <= stationarity_tol) {
      res.converged = true;
      break;
    }
  }

  res.control = u;
  double quad = c0;
  for (std::size_t k = 0; k < m; ++k) {
    quad += b_lin[k] * u[k];
    for (std::size_t l = 0; l < m; ++l) quad += A[k][l] * u[k] * u[l];
  }
  res.objective = quad;
  return res;
}

}  // namespace flownet
