#include <cmath>

#include "doctest.h"
#include "flownet/demand.hpp"
#include "flownet/errors.hpp"
#include "test_support.hpp"

using namespace flownet;
using doctest::Approx;

namespace {

JacobiParams base_params() {
  JacobiParams p;
  p.kappa = 2.0;
  p.sigma = 0.6;
  p.d0 = 0.8;
  p.theta = CoefFn::constant(0.4);
  return p;
}

}  // namespace

TEST_CASE("jacobi simulation: frozen drift cases") {
  SampleGrid grid{0.0, 1e-3, 1000};
  RandomStream rng(42);

  // zero drift and diffusion keeps the path at d0
  JacobiParams still;
  still.kappa = 0.0;
  still.sigma = 0.0;
  still.d0 = 0.37;
  still.theta = CoefFn::sinusoid(0.5, 0.3, 3.0, 0.2);
  for (double z : simulate_jacobi(still, grid, rng)) CHECK(z == 0.37);

  // sigma = 0: Euler-Maruyama of the mean-reversion ODE; global error O(dt)
  JacobiParams det = base_params();
  det.sigma = 0.0;
  const auto path = simulate_jacobi(det, grid, rng);
  double prev = std::abs(path[0] - 0.4);
  for (int j : {250, 500, 1000}) {
    const double t = grid.time(j);
    const double exact = 0.4 + (0.8 - 0.4) * std::exp(-2.0 * t);
    // |EM - exact| <= |z0-theta| kappa^2 t e^{-kappa t} dt / 2 (+ slack)
    const double bound = 0.4 * 4.0 * t * std::exp(-2.0 * t) * grid.dt + 1e-12;
    CHECK(std::abs(path[static_cast<std::size_t>(j)] - exact) <= bound);
    const double gap = std::abs(path[static_cast<std::size_t>(j)] - 0.4);
    CHECK(gap <= prev);  // monotone approach toward theta
    prev = gap;
  }
}

TEST_CASE("jacobi simulation: sample mean matches the constant-theta conditional mean") {
  const JacobiParams p = base_params();
  SampleGrid grid{0.0, 5e-4, 2000};  // t = 1
  const auto theta_cache = cache_theta(p.theta, grid);
  const auto st = testsupport::mc_stats(30000, [&](int i) {
    RandomStream rng = RandomStream::demand_stream(1234, static_cast<std::uint64_t>(i), 0);
    return simulate_jacobi(p, grid, rng, theta_cache).back();
  });
  const double exact = jacobi_mean_const(2.0, 0.4, 0.0, 0.8, 1.0);
  CHECK(std::abs(st.mean - exact) <= 3.0 * st.se);
}

TEST_CASE("jacobi paths stay inside [0,1] even for boundary-attracted parameters") {
  JacobiParams p;
  p.kappa = 2.0;
  p.sigma = 2.25;  // stationary Beta parameters < 1: the boundaries attract
  p.d0 = 0.4;
  p.theta = CoefFn::sinusoid(0.45, 0.2, 3.141592653589793, 1.0);
  SampleGrid grid{0.0, 1e-3, 2500};
  const auto theta_cache = cache_theta(p.theta, grid);
  bool touched = false;
  for (int i = 0; i < 50; ++i) {
    RandomStream rng = RandomStream::demand_stream(99, static_cast<std::uint64_t>(i), 0);
    for (double z : simulate_jacobi(p, grid, rng, theta_cache)) {
      REQUIRE(z >= 0.0);
      REQUIRE(z <= 1.0);
      touched = touched || z == 0.0 || z == 1.0;
    }
  }
  CHECK(touched);  // the clamp is actually exercised at these parameters
}

TEST_CASE("ou simulation") {
  SampleGrid grid{0.0, 1e-3, 1000};
  OuParams ou;
  ou.kappa = 1.0;
  ou.sigma = 0.0;
  ou.z0 = 0.9;
  ou.theta = CoefFn::constant(0.5);

  // deterministic mean reversion when sigma = 0
  RandomStream rng(3);
  const auto det = simulate_ou(ou, grid, rng);
  CHECK(std::abs(det.back() - (0.5 + 0.4 * std::exp(-1.0))) <= 1e-3);

  // sample mean matches the conditional mean
  ou.sigma = 0.1;
  const auto st = testsupport::mc_stats(20000, [&](int i) {
    RandomStream r = RandomStream::demand_stream(77, static_cast<std::uint64_t>(i), 0);
    return simulate_ou(ou, grid, r).back();
  });
  CHECK(std::abs(st.mean - ou_mean(ou, 0.0, 0.9, 1.0)) <= 3.0 * st.se);

  // Table-2-style parameters: the unbounded process goes negative while the
  // Jacobi companion on the same draws never does
  OuParams v2;
  v2.kappa = 2.0;
  v2.sigma = 0.14;
  v2.z0 = 0.4;
  v2.theta = CoefFn::sinusoid(0.45, 0.2, 3.141592653589793, 1.0);
  JacobiParams j2;
  j2.kappa = 2.0;
  j2.sigma = 2.25;
  j2.d0 = 0.4;
  j2.theta = v2.theta;
  SampleGrid g2{0.0, 1e-3, 2500};
  int negative = 0;
  for (int i = 0; i < 100; ++i) {
    RandomStream r1 = RandomStream::demand_stream(5, static_cast<std::uint64_t>(i), 0);
    RandomStream r2 = RandomStream::demand_stream(5, static_cast<std::uint64_t>(i), 0);
    const auto ou_path = simulate_ou(v2, g2, r1);
    const auto j_path = simulate_jacobi(j2, g2, r2);
    bool neg = false;
    for (double z : ou_path) neg = neg || z < 0.0;
    negative += neg;
    for (double z : j_path) REQUIRE((z >= 0.0 && z <= 1.0));
  }
  CHECK(negative >= 1);
}

TEST_CASE("conditional mean: closed forms") {
  const JacobiParams p = base_params();
  CHECK(jacobi_mean(p, 0.3, 0.71, 0.3) == 0.71);  // t = t_obs
  // constant theta, elapsed ln(2)/2: e^{-kappa dt} = 1/2
  const double dt = std::log(2.0) / 2.0;
  CHECK(jacobi_mean(p, 0.0, 0.8, dt) == Approx(0.6).epsilon(1e-14));
  CHECK(jacobi_mean_const(2.0, 0.4, 0.0, 0.8, dt) == Approx(0.6).epsilon(1e-14));

  // time-varying formula reduces to the constant-theta one
  testsupport::PropRng rng(31);
  for (int i = 0; i < 25; ++i) {
    JacobiParams q = base_params();
    q.kappa = rng.uniform(0.2, 4.0);
    const double th = rng.uniform(0.05, 0.95);
    q.theta = CoefFn::constant(th);
    const double z0 = rng.uniform(0.0, 1.0);
    const double t = rng.uniform(0.0, 3.0);
    CHECK(jacobi_mean(q, 0.0, z0, t) ==
          Approx(jacobi_mean_const(q.kappa, th, 0.0, z0, t)).epsilon(1e-10));
  }
}

TEST_CASE("conditional mean: sinusoid mean level against Monte Carlo") {
  JacobiParams p = base_params();
  p.theta = CoefFn::sinusoid(0.4, 0.25, 1.0, 0.0);
  const double cf = jacobi_mean(p, 0.0, 0.8, 1.3);
  CHECK(cf == Approx(0.603098543328147).epsilon(1e-12));  // frozen (RK4 ODE oracle)
  SampleGrid grid{0.0, 5e-4, 2600};
  const auto theta_cache = cache_theta(p.theta, grid);
  const auto st = testsupport::mc_stats(30000, [&](int i) {
    RandomStream rng = RandomStream::demand_stream(55, static_cast<std::uint64_t>(i), 0);
    return simulate_jacobi(p, grid, rng, theta_cache).back();
  });
  CHECK(std::abs(st.mean - cf) <= 3.0 * st.se);
}

TEST_CASE("second moment: boundary cases and constant-theta reduction") {
  const JacobiParams p = base_params();
  CHECK(jacobi_second_moment(p, 0.4, 0.7, 0.4) == Approx(0.49).epsilon(1e-14));

  // t -> infinity limit of the constant-theta closed form
  const double limit = (2.0 * 2.0 * 0.4 + 0.36) * 0.4 / (2.0 * 2.0 + 0.36);
  CHECK(jacobi_second_moment(p, 0.0, 0.8, 60.0) == Approx(limit).epsilon(1e-12));

  testsupport::PropRng rng(37);
  for (int i = 0; i < 25; ++i) {
    JacobiParams q;
    q.kappa = rng.uniform(0.3, 4.0);
    q.sigma = rng.uniform(0.0, 2.0);
    const double th = rng.uniform(0.05, 0.95);
    q.theta = CoefFn::constant(th);
    const double z0 = rng.uniform(0.0, 1.0);
    const double t = rng.uniform(0.01, 2.5);
    const double quad = jacobi_second_moment(q, 0.0, z0, t);
    CHECK(quad == Approx(jacobi_m2_const(q.kappa, q.sigma, th, 0.0, z0, t)).epsilon(1e-10));
    // variance non-negativity
    const double m1 = jacobi_mean(q, 0.0, z0, t);
    CHECK(quad >= m1 * m1 - 1e-12);
  }
}

TEST_CASE("second moment: step recursion agrees with quadrature and the unrolled sum") {
  JacobiParams p = base_params();
  p.theta = CoefFn::piecewise_constant({0.5, 1.1}, {0.3, 0.7, 0.45});
  const double T = 1.7;

  const double quad = jacobi_second_moment(p, 0.0, 0.8, T);
  const double recur = jacobi_m2_step_recursion(p, 0.0, 0.8, T);
  CHECK(std::abs(quad - recur) <= 1e-9);
  CHECK(recur == Approx(0.276141665547622).epsilon(1e-12));  // frozen (three independent routes)
  CHECK(recur ==
        Approx(testsupport::unrolled_step_m2(2.0, 0.6, {0.0, 0.5, 1.1, T}, {0.3, 0.7, 0.45}, 0.8))
            .epsilon(1e-12));

  // base case: a single step is exactly the constant-theta closed form
  JacobiParams single = base_params();
  CHECK(jacobi_m2_step_recursion(single, 0.0, 0.8, 1.3) ==
        Approx(jacobi_m2_const(2.0, 0.6, 0.4, 0.0, 0.8, 1.3)).epsilon(1e-14));

  // two equal steps collapse to one
  JacobiParams twin = base_params();
  twin.theta = CoefFn::piecewise_constant({0.9}, {0.4, 0.4});
  CHECK(jacobi_m2_step_recursion(twin, 0.0, 0.8, 1.3) ==
        Approx(jacobi_m2_const(2.0, 0.6, 0.4, 0.0, 0.8, 1.3)).epsilon(1e-13));

  // wrong theta variant is rejected
  JacobiParams wavy = base_params();
  wavy.theta = CoefFn::sinusoid(0.4, 0.2, 1.0, 0.0);
  CHECK_THROWS_WITH_AS(jacobi_m2_step_recursion(wavy, 0.0, 0.8, 1.0),
                       doctest::Contains("WrongThetaVariant"), Error);
}

TEST_CASE("second moment: three-step theta against Monte Carlo") {
  JacobiParams p = base_params();
  p.theta = CoefFn::piecewise_constant({0.5, 1.1}, {0.3, 0.7, 0.45});
  const double T = 1.7;
  SampleGrid grid{0.0, 5e-4, 3400};
  const auto theta_cache = cache_theta(p.theta, grid);
  const auto st = testsupport::mc_stats(30000, [&](int i) {
    RandomStream rng = RandomStream::demand_stream(91, static_cast<std::uint64_t>(i), 0);
    const double z = simulate_jacobi(p, grid, rng, theta_cache).back();
    return z * z;
  });
  CHECK(std::abs(st.mean - jacobi_m2_step_recursion(p, 0.0, 0.8, T)) <= 3.0 * st.se);
}

TEST_CASE("ou conditional mean") {
  OuParams ou;
  ou.kappa = 1.5;
  ou.sigma = 0.2;
  ou.z0 = 0.9;
  ou.theta = CoefFn::constant(0.5);
  CHECK(ou_mean(ou, 0.2, 0.9, 0.2) == 0.9);
  CHECK(ou_mean(ou, 0.0, 0.9, 1.0) == Approx(0.5 + 0.4 * std::exp(-1.5)).epsilon(1e-13));
}

TEST_CASE("markov re-conditioning: tower property over an intermediate observation") {
  JacobiParams p = base_params();
  p.theta = CoefFn::sinusoid(0.4, 0.25, 1.0, 0.0);
  const double t_hat = 0.6, t_end = 1.4;
  SampleGrid grid{0.0, 5e-4, 2800};
  const auto theta_cache = cache_theta(p.theta, grid);
  const int j_hat = grid.index_at(t_hat);
  // E[ E[D_t | F_that] ] must equal E[D_t | F_t0]
  const auto st = testsupport::mc_stats(20000, [&](int i) {
    RandomStream rng = RandomStream::demand_stream(123, static_cast<std::uint64_t>(i), 0);
    const auto path = simulate_jacobi(p, grid, rng, theta_cache);
    return jacobi_mean(p, t_hat, path[static_cast<std::size_t>(j_hat)], t_end);
  });
  CHECK(std::abs(st.mean - jacobi_mean(p, 0.0, p.d0, t_end)) <= 3.0 * st.se);
}

TEST_CASE("expected squared deviation") {
  JacobiParams p = base_params();
  p.theta = CoefFn::sinusoid(0.4, 0.25, 1.0, 0.0);
  const double t = 1.1;
  const double m1 = jacobi_mean(p, 0.0, 0.8, t);
  const double m2 = jacobi_second_moment(p, 0.0, 0.8, t);

  // at flux = m1 the deviation is the conditional variance
  CHECK(expected_sq_deviation(p, m1, 0.0, 0.8, t) == Approx(m2 - m1 * m1).epsilon(1e-12));
  CHECK(expected_sq_deviation(p, m1, 0.0, 0.8, t) >= 0.0);

  // deterministic demand tracked exactly has zero expected deviation
  JacobiParams det = p;
  det.sigma = 0.0;
  CHECK(std::abs(expected_sq_deviation(det, jacobi_mean(det, 0.0, 0.8, t), 0.0, 0.8, t)) <=
        1e-10);

  // the grid argmin sits at the conditional mean (mean-square optimality)
  double best = -1.0, best_val = 1e300;
  for (int k = 0; k <= 1000; ++k) {
    const double flux = static_cast<double>(k) / 1000.0;
    const double val = expected_sq_deviation(p, flux, 0.0, 0.8, t);
    if (val < best_val) {
      best_val = val;
      best = flux;
    }
  }
  CHECK(std::abs(best - m1) <= 1.0 / 1000.0);
}

TEST_CASE("affine demand range transforms the moments") {
  JacobiParams p = base_params();
  p.lo = 2.0;
  p.hi = 6.0;
  const double span = 4.0;
  const double t = 0.9;
  const double obs = 2.0 + span * 0.8;
  const double m1_01 = jacobi_mean(p, 0.0, 0.8, t);
  const double m2_01 = jacobi_second_moment(p, 0.0, 0.8, t);
  CHECK(jacobi_mean_in_range(p, 0.0, obs, t) == Approx(2.0 + span * m1_01).epsilon(1e-13));
  CHECK(jacobi_m2_in_range(p, 0.0, obs, t) ==
        Approx(4.0 + 2.0 * 2.0 * span * m1_01 + span * span * m2_01).epsilon(1e-13));
}

TEST_CASE("parameter validation") {
  JacobiParams p = base_params();
  CHECK_NOTHROW(p.check());
  p.sigma = 0.5;
  p.kappa = 0.0;
  CHECK_THROWS_AS(p.check(), Error);
  p = base_params();
  p.d0 = 1.2;
  CHECK_THROWS_AS(p.check(), Error);
  p = base_params();
  p.theta = CoefFn::constant(1.1);
  CHECK_THROWS_AS(p.check(), Error);
}
