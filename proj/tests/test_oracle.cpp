#include <cmath>

#include "doctest.h"
#include "flownet/oracle.hpp"
#include "test_support.hpp"

using namespace flownet;
using doctest::Approx;

namespace {

// 1-1 chain as a Scenario (constant coefficients, Jacobi demand)
Scenario chain_scenario(double lambda, double mu, const JacobiParams& leaf) {
  Scenario sc;
  sc.name = "chain";
  sc.arcs.resize(2);
  const CoefFn v = CoefFn::constant(lambda);
  const CoefFn m = CoefFn::constant(mu);
  sc.arcs[0] = {1, 0, 1, 1.0, v, {m, m}};
  sc.arcs[1] = {2, 1, 2, 1.0, v, {m, m}};
  sc.demands.resize(1);
  sc.demands[0].node = 2;
  sc.demands[0].jacobi = leaf;
  return sc;
}

}  // namespace

TEST_CASE("oracle reproduces the conditional expectation on a constant 1-1 network") {
  JacobiParams leaf;
  leaf.kappa = 2.0;
  leaf.sigma = 0.6;
  leaf.d0 = 0.8;
  leaf.theta = CoefFn::constant(0.4);
  const Scenario sc = chain_scenario(14.0, 0.0, leaf);

  const OracleResult res = oracle_control_optimizer(sc, 1, 40);
  REQUIRE(res.converged);
  // pointwise: u(t) = E[D at t + 2/14 | t0]; compare at interval midpoints
  const double h = res.grid_times[1] - res.grid_times[0];
  for (std::size_t k = 0; k < res.control.size(); ++k) {
    const double mid = res.grid_times[k] + 0.5 * h;
    const double expected = jacobi_mean(leaf, 0.0, 0.8, mid + 2.0 / 14.0);
    // grid tolerance: the control is a cell average of a Lipschitz target
    CHECK(std::abs(res.control[k] - expected) <= 0.5 * h * 1.0 + 2e-3);
  }
}

TEST_CASE("oracle cannot beat the explicit control by more than the tolerance") {
  JacobiParams leaf;
  leaf.kappa = 1.5;
  leaf.sigma = 0.8;
  leaf.d0 = 0.3;
  leaf.theta = CoefFn::sinusoid(0.45, 0.2, 3.141592653589793, 1.0);
  const Scenario sc = chain_scenario(14.0, 0.4, leaf);

  const Network net = sc.make_network(1);
  const SimulationEngine engine(net, sc.horizon, GridSpec{.dx = sc.dx});
  const Trajectory explicit_traj = explicit_control_trajectory(sc, engine);
  const double explicit_obj = deterministic_objective(sc, engine, explicit_traj);

  const OracleResult res = oracle_control_optimizer(sc, 1, 50);
  REQUIRE(res.converged);
  CHECK(explicit_obj <= res.objective + 1e-4);
}
