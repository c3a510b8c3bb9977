#ifndef FLOWNET_DEMAND_HPP
#define FLOWNET_DEMAND_HPP

#include <functional>
#include <span>
#include <vector>

#include "flownet/coef.hpp"
#include "flownet/rng.hpp"

namespace flownet {

/// Jacobi diffusion dZ = kappa (theta(t) - Z) dt + sigma sqrt(Z(1-Z)) dW on
/// [0,1], optionally shifted to [lo, hi] by the affine map lo + (hi-lo) Z.
/// kappa, sigma, d0 and theta always refer to the [0,1]-scale process.
struct JacobiParams {
  double kappa = 0.0;
  double sigma = 0.0;
  double d0 = 0.0;
  CoefFn theta;
  double lo = 0.0;
  double hi = 1.0;

  void check() const;  // kappa > 0 when sigma > 0; theta in (0,1); d0 in [0,1]
};

/// Ornstein-Uhlenbeck dZ = kappa (theta(t) - Z) dt + sigma dW (unbounded).
struct OuParams {
  double kappa = 0.0;
  double sigma = 0.0;
  double z0 = 0.0;
  CoefFn theta;
};

/// Uniform sample grid t_j = t0 + j dt, j = 0..n_steps.
struct SampleGrid {
  double t0 = 0.0;
  double dt = 1e-4;
  int n_steps = 0;

  double time(int j) const { return t0 + static_cast<double>(j) * dt; }
  int index_at(double t) const;  // nearest grid index, clamped
};

/// theta sampled on the grid once; shared across paths of a Monte Carlo run.
std::vector<double> cache_theta(const CoefFn& theta, const SampleGrid& grid);

/// Truncated Euler-Maruyama path of the Jacobi process:
/// Z* = Z + dt kappa (theta(t_j) - Z) + sigma sqrt(dt Z (1-Z)) X_j, then
/// clamping to [0,1] exactly as the displayed case split. Values on the
/// [0,1] scale.
std::vector<double> simulate_jacobi(const JacobiParams& p, const SampleGrid& grid,
                                    RandomStream& rng,
                                    std::span<const double> theta_cache = {});

/// Euler-Maruyama path of the OU process, Z' = Z + dt kappa (theta - Z) +
/// sigma X_j, with no truncation (paths may leave [0,1] and go negative).
std::vector<double> simulate_ou(const OuParams& p, const SampleGrid& grid, RandomStream& rng,
                                std::span<const double> theta_cache = {});

/// E[Z_t | Z_{t_obs} = z_obs] for the [0,1]-scale Jacobi process, via the
/// closed-form solution of the conditional-mean ODE; exact for the
/// constant/sinusoid/piecewise-constant theta family.
double jacobi_mean(const JacobiParams& p, double t_obs, double z_obs, double t);

/// E[Z_t^2 | Z_{t_obs} = z_obs]: outer convolution integral evaluated by
/// adaptive Gauss-Legendre quadrature with the inner mean in closed form.
double jacobi_second_moment(const JacobiParams& p, double t_obs, double z_obs, double t);

/// Constant-theta closed forms (mean reversion level theta_const).
double jacobi_mean_const(double kappa, double theta_const, double t_obs, double z_obs, double t);
double jacobi_m2_const(double kappa, double sigma, double theta_const, double t_obs, double z_obs,
                       double t);

/// Exact second moment for piecewise-constant theta: the constant-theta
/// second moment is affine in (z, z^2), so moments propagate segment by
/// segment by the tower property. Throws WrongThetaVariant for sinusoids.
double jacobi_m2_step_recursion(const JacobiParams& p, double t_obs, double z_obs, double t);

/// OU conditional mean (same ODE as the Jacobi mean).
double ou_mean(const OuParams& p, double t_obs, double z_obs, double t);

/// E[(D_t - flux)^2 | D_{t_obs} = z_obs] = m2 - 2 flux m1 + flux^2, on the
/// [lo, hi] scale of p (moments transform affinely).
double expected_sq_deviation(const JacobiParams& p, double flux, double t_obs, double z_obs,
                             double t);

/// Moments on the [lo, hi] scale: m1 -> lo + (hi-lo) m1,
/// m2 -> lo^2 + 2 lo (hi-lo) m1 + (hi-lo)^2 m2.
double jacobi_mean_in_range(const JacobiParams& p, double t_obs, double observed, double t);
double jacobi_m2_in_range(const JacobiParams& p, double t_obs, double observed, double t);

/// Adaptive Gauss-Legendre quadrature (15-point panels, recursive
/// subdivision). Exposed for test oracles.
double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-12, double abs_tol = 1e-14);

}  // namespace flownet

#endif
