#include "flownet/transit.hpp"

#include <cmath>
#include <string>

#include "flownet/errors.hpp"

namespace flownet {

double TransitMap::invert_integral(ArcId a, double anchor, double y) const {
  const CoefFn& lambda = net_->arc(a).velocity;
  if (lambda.is_constant()) return anchor + y / lambda.base();

  const double lo_rate = lambda.min_value();
  const double hi_rate = lambda.max_value();
  // g(t) = int_anchor^t lambda - y is strictly increasing with slope in
  // [lo_rate, hi_rate]
  double lo, hi;
  if (y >= 0.0) {
    lo = anchor + y / hi_rate;
    hi = anchor + y / lo_rate;
  } else {
    lo = anchor + y / lo_rate;
    hi = anchor + y / hi_rate;
  }
  double t = 0.5 * (lo + hi);
  double g = lambda.integral(anchor, t) - y;
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(g) <= kRootTol) return t;
    if (g > 0.0)
      hi = t;
    else
      lo = t;
    const double step = g / lambda(t);
    double next = t - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    t = next;
    g = lambda.integral(anchor, t) - y;
  }
  fail(Errc::NotConverged, "antiderivative inversion on arc " + std::to_string(a + 1));
}

double TransitMap::transit_time(ArcId a, double t_dep) const {
  return invert_integral(a, t_dep, net_->arc(a).length);
}

double TransitMap::transit_time_within_horizon(ArcId a, double t_dep) const {
  const double t_arr = transit_time(a, t_dep);
  if (t_arr > horizon_.T + kRootTol)
    fail(Errc::OutOfHorizon, "arc " + std::to_string(a + 1) + " transit ends after T");
  return t_arr;
}

double TransitMap::node_arrival(NodeId v_from, NodeId v_to, double t) const {
  double s = t;
  for (ArcId a : net_->path_arcs(v_from, v_to)) s = transit_time(a, s);
  return s;
}

double TransitMap::node_arrival_within_horizon(NodeId v_from, NodeId v_to, double t) const {
  const double t_arr = node_arrival(v_from, v_to, t);
  if (t_arr > horizon_.T + kRootTol)
    fail(Errc::OutOfHorizon, "arrival at node " + std::to_string(v_to) + " after T");
  return t_arr;
}

double TransitMap::injection_time(NodeId v_from, NodeId v_to, double t_arr) const {
  const auto path = net_->path_arcs(v_from, v_to);
  double s = t_arr;
  for (auto it = path.rbegin(); it != path.rend(); ++it)
    s = invert_integral(*it, s, -net_->arc(*it).length);
  return s;
}

double TransitMap::damping_factor(ArcId a, double t_a, double t_b) const {
  return std::exp(-net_->arc(a).damping.integral(t_a, t_b));
}

double TransitMap::gamma(NodeId v_i, NodeId v_r, double t) const {
  double factor = 1.0;
  double entry = t;
  for (ArcId a : net_->path_arcs(v_i, v_r)) {
    const Arc& arc = net_->arc(a);
    const double exit = transit_time(a, entry);
    factor *= arc.velocity(entry) / arc.velocity(exit) * std::exp(arc.damping.integral(entry, exit));
    entry = exit;
  }
  return factor;
}

}  // namespace flownet
