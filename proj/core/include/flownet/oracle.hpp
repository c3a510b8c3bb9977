#ifndef FLOWNET_ORACLE_HPP
#define FLOWNET_ORACLE_HPP

#include "flownet/montecarlo.hpp"

namespace flownet {

struct OracleResult {
  std::vector<double> grid_times;  // n_intervals + 1 interval edges
  std::vector<double> control;     // piecewise-constant control values
  double objective = 0.0;
  double stationarity = 0.0;       // projected-gradient infinity norm
  int sweeps = 0;
  bool converged = false;
};

/// Brute-force stand-in for a general-purpose optimizer on desk-scale
/// instances: minimizes the deterministically reformulated objective (the
/// time-integrated m2 - 2 f m1 + f^2 over the demand leaves, with the PDE
/// engine as the forward map) over piecewise-constant controls u >= 0 on
/// n_intervals cells by projected coordinate descent. The objective is an
/// exact quadratic in u (the scheme is linear), assembled from unit basis
/// responses; conditioning is the initial information (t0, d0).
OracleResult oracle_control_optimizer(const Scenario& sc, int profile, int n_intervals,
                                      double stationarity_tol = 1e-6, int max_sweeps = 2000);

/// The same deterministic objective evaluated for an arbitrary supply
/// trajectory (e.g. one produced by the explicit control).
double deterministic_objective(const Scenario& sc, const SimulationEngine& engine,
                               const Trajectory& traj);

/// The explicit control's trajectory under the scenario's initial
/// information (sigma may be > 0; conditioning stays at t0).
Trajectory explicit_control_trajectory(const Scenario& sc, const SimulationEngine& engine);

}  // namespace flownet

#endif
