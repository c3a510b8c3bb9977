#include "flownet/demand.hpp"

#include <algorithm>
#include <cmath>

#include "flownet/errors.hpp"

namespace flownet {

namespace {

// 15-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; the rule
// is symmetric).
constexpr double kGlNode[8] = {0.0,
                              0.2011940939974345,
                              0.3941513470775634,
                              0.5709721726085388,
                              0.7244177313601701,
                              0.8482065834104272,
                              0.9372733924007060,
                              0.9879925180204854};
constexpr double kGlWeight[8] = {0.2025782419255613, 0.1984314853271116, 0.1861610000155622,
                                 0.1662692058169939, 0.1395706779261543, 0.1071592204671719,
                                 0.0703660474881081, 0.0307532419961173};

double gl15(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = kGlWeight[0] * f(mid);
  for (int i = 1; i < 8; ++i)
    sum += kGlWeight[i] * (f(mid - half * kGlNode[i]) + f(mid + half * kGlNode[i]));
  return half * sum;
}

double adapt(const std::function<double(double)>& f, double a, double b, double whole,
             double rel_tol, double abs_tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl15(f, a, mid);
  const double right = gl15(f, mid, b);
  const double refined = left + right;
  const double err = std::abs(refined - whole);
  if (depth <= 0 || err <= std::max(abs_tol, rel_tol * std::abs(refined))) return refined;
  return adapt(f, a, mid, left, rel_tol, 0.5 * abs_tol, depth - 1) +
         adapt(f, mid, b, right, rel_tol, 0.5 * abs_tol, depth - 1);
}

// kappa * int_{t_obs}^{t} e^{-kappa (t - s)} theta(s) ds, closed form per
// variant; this is the convolution term of the conditional-mean ODE
// solution.
double mean_convolution(const CoefFn& theta, double kappa, double t_obs, double t) {
  if (kappa == 0.0) return 0.0;
  switch (theta.kind()) {
    case CoefFn::Kind::Constant:
      return theta.base() * (1.0 - std::exp(-kappa * (t - t_obs)));
    case CoefFn::Kind::Sinusoid: {
      const double w = theta.omega(), p = theta.phase();
      const double e1 = std::exp(-kappa * (t - t_obs));
      auto primitive = [&](double s) { return kappa * std::sin(w * s + p) - w * std::cos(w * s + p); };
      const double osc = (primitive(t) - e1 * primitive(t_obs)) / (kappa * kappa + w * w);
      return theta.base() * (1.0 - e1) + kappa * theta.amplitude() * osc;
    }
    case CoefFn::Kind::PiecewiseConstant: {
      // kappa int_a^b e^{-kappa(t-s)} ds = e^{-kappa(t-b)} - e^{-kappa(t-a)}
      const auto& breaks = theta.breakpoints();
      const auto& vals = theta.step_values();
      double total = 0.0;
      double left = t_obs;
      for (std::size_t k = 0; k <= breaks.size(); ++k) {
        const double right = (k < breaks.size()) ? std::min(breaks[k], t) : t;
        if (right > left) {
          total += vals[k] * (std::exp(-kappa * (t - right)) - std::exp(-kappa * (t - left)));
          left = right;
        }
        if (left >= t) break;
      }
      return total;
    }
  }
  return 0.0;
}

// Constant-theta second moment written as an affine map of (z, z^2):
// m2(t_obs + dt | z) = a0 + a1 z + a2 z^2.
struct M2Affine {
  double a0, a1, a2;
};

M2Affine m2_const_affine(double kappa, double sigma, double theta, double dt) {
  const double s2 = sigma * sigma;
  const double beta = 2.0 * kappa + s2;
  if (beta == 0.0) return {0.0, 0.0, 1.0};  // kappa = sigma = 0: frozen process
  const double num = 2.0 * kappa * theta + s2;
  const double e1 = std::exp(-kappa * dt);
  const double e2 = std::exp(-beta * dt);
  const double stat = num * theta / beta;
  const double slope = num / (kappa + s2);
  const double d = kappa * theta * num / (beta * (kappa + s2));
  // m2 = stat + slope (z - theta) e1 + (z^2 - slope z + d) e2
  return {stat - slope * theta * e1 + d * e2, slope * (e1 - e2), e2};
}

}  // namespace

void JacobiParams::check() const {
  if (sigma < 0.0) fail(Errc::BadParameter, "sigma must be non-negative");
  if (sigma > 0.0 && kappa <= 0.0) fail(Errc::BadParameter, "kappa must be positive when sigma > 0");
  if (kappa < 0.0) fail(Errc::BadParameter, "kappa must be non-negative");
  if (d0 < 0.0 || d0 > 1.0) fail(Errc::BadParameter, "d0 must lie in [0,1]");
  if (kappa > 0.0 && (theta.min_value() <= 0.0 || theta.max_value() >= 1.0))
    fail(Errc::BadParameter, "theta must take values in (0,1)");
  if (hi <= lo) fail(Errc::BadParameter, "demand range must satisfy hi > lo");
}

int SampleGrid::index_at(double t) const {
  const int j = static_cast<int>(std::lround((t - t0) / dt));
  return std::clamp(j, 0, n_steps);
}

std::vector<double> cache_theta(const CoefFn& theta, const SampleGrid& grid) {
  std::vector<double> cache(static_cast<std::size_t>(grid.n_steps));
  for (int j = 0; j < grid.n_steps; ++j) cache[static_cast<std::size_t>(j)] = theta(grid.time(j));
  return cache;
}

std::vector<double> simulate_jacobi(const JacobiParams& p, const SampleGrid& grid,
                                    RandomStream& rng, std::span<const double> theta_cache) {
  std::vector<double> path(static_cast<std::size_t>(grid.n_steps) + 1);
  double z = p.d0;
  path[0] = z;
  const double dt = grid.dt;
  const double root_dt = std::sqrt(dt);
  for (int j = 0; j < grid.n_steps; ++j) {
    const double th = theta_cache.empty() ? p.theta(grid.time(j)) : theta_cache[static_cast<std::size_t>(j)];
    const double z_star =
        z + dt * p.kappa * (th - z) + p.sigma * root_dt * std::sqrt(z * (1.0 - z)) * rng.normal();
    z = z_star >= 1.0 ? 1.0 : (z_star <= 0.0 ? 0.0 : z_star);
    path[static_cast<std::size_t>(j) + 1] = z;
  }
  return path;
}

std::vector<double> simulate_ou(const OuParams& p, const SampleGrid& grid, RandomStream& rng,
                                std::span<const double> theta_cache) {
  std::vector<double> path(static_cast<std::size_t>(grid.n_steps) + 1);
  double z = p.z0;
  path[0] = z;
  const double dt = grid.dt;
  for (int j = 0; j < grid.n_steps; ++j) {
    const double th = theta_cache.empty() ? p.theta(grid.time(j)) : theta_cache[static_cast<std::size_t>(j)];
    z = z + dt * p.kappa * (th - z) + p.sigma * rng.normal();
    path[static_cast<std::size_t>(j) + 1] = z;
  }
  return path;
}

double jacobi_mean(const JacobiParams& p, double t_obs, double z_obs, double t) {
  return z_obs * std::exp(-p.kappa * (t - t_obs)) + mean_convolution(p.theta, p.kappa, t_obs, t);
}

double jacobi_mean_const(double kappa, double theta_const, double t_obs, double z_obs, double t) {
  return theta_const + (z_obs - theta_const) * std::exp(-kappa * (t - t_obs));
}

double jacobi_m2_const(double kappa, double sigma, double theta_const, double t_obs, double z_obs,
                       double t) {
  const M2Affine c = m2_const_affine(kappa, sigma, theta_const, t - t_obs);
  return c.a0 + c.a1 * z_obs + c.a2 * z_obs * z_obs;
}

double jacobi_second_moment(const JacobiParams& p, double t_obs, double z_obs, double t) {
  if (t <= t_obs) return z_obs * z_obs;
  const double s2 = p.sigma * p.sigma;
  const double beta = 2.0 * p.kappa + s2;
  auto integrand = [&](double s) {
    return (2.0 * p.kappa * p.theta(s) + s2) * jacobi_mean(p, t_obs, z_obs, s) *
           std::exp(-beta * (t - s));
  };
  // split at theta breakpoints so each panel sees a smooth integrand
  std::vector<double> cuts{t_obs};
  if (p.theta.kind() == CoefFn::Kind::PiecewiseConstant)
    for (double b : p.theta.breakpoints())
      if (b > t_obs && b < t) cuts.push_back(b);
  cuts.push_back(t);
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    integral += adaptive_quadrature(integrand, cuts[k], cuts[k + 1], 1e-12, 1e-15);
  return integral + z_obs * z_obs * std::exp(-beta * (t - t_obs));
}

double jacobi_m2_step_recursion(const JacobiParams& p, double t_obs, double z_obs, double t) {
  if (!p.theta.is_piecewise_constant())
    fail(Errc::WrongThetaVariant, "step recursion requires piecewise-constant theta");
  if (t <= t_obs) return z_obs * z_obs;

  std::vector<double> cuts{t_obs};
  for (double b : p.theta.breakpoints())
    if (b > t_obs && b < t) cuts.push_back(b);
  cuts.push_back(t);

  double m1 = z_obs;
  double m2 = z_obs * z_obs;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double theta_k = p.theta(cuts[k]);
    const double dt = cuts[k + 1] - cuts[k];
    const M2Affine c = m2_const_affine(p.kappa, p.sigma, theta_k, dt);
    const double m2_next = c.a0 + c.a1 * m1 + c.a2 * m2;
    m1 = jacobi_mean_const(p.kappa, theta_k, 0.0, m1, dt);
    m2 = m2_next;
  }
  return m2;
}

double ou_mean(const OuParams& p, double t_obs, double z_obs, double t) {
  return z_obs * std::exp(-p.kappa * (t - t_obs)) + mean_convolution(p.theta, p.kappa, t_obs, t);
}

double jacobi_mean_in_range(const JacobiParams& p, double t_obs, double observed, double t) {
  const double span = p.hi - p.lo;
  const double z01 = (observed - p.lo) / span;
  return p.lo + span * jacobi_mean(p, t_obs, z01, t);
}

double jacobi_m2_in_range(const JacobiParams& p, double t_obs, double observed, double t) {
  const double span = p.hi - p.lo;
  const double z01 = (observed - p.lo) / span;
  const double m1 = jacobi_mean(p, t_obs, z01, t);
  const double m2 = jacobi_second_moment(p, t_obs, z01, t);
  return p.lo * p.lo + 2.0 * p.lo * span * m1 + span * span * m2;
}

double expected_sq_deviation(const JacobiParams& p, double flux, double t_obs, double z_obs,
                             double t) {
  const double m1 = jacobi_mean_in_range(p, t_obs, z_obs, t);
  const double m2 = jacobi_m2_in_range(p, t_obs, z_obs, t);
  return m2 - 2.0 * flux * m1 + flux * flux;
}

double adaptive_quadrature(const std::function<double(double)>& f, double a, double b,
                           double rel_tol, double abs_tol) {
  if (a == b) return 0.0;
  return adapt(f, a, b, gl15(f, a, b), rel_tol, abs_tol, 28);
}

}  // namespace flownet
