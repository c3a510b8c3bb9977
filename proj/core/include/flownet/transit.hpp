#ifndef FLOWNET_TRANSIT_HPP
#define FLOWNET_TRANSIT_HPP

#include "flownet/netgraph.hpp"

namespace flownet {

/// Transit times, damping factors and path compensation factors on top of
/// the arc velocity antiderivatives Lambda_i. Lambda_i is strictly
/// increasing (velocities are strictly positive), hence invertible; the
/// inversion is closed-form for constant velocities and a safeguarded
/// Newton/bisection root find otherwise, to |Lambda(t) - y| <= 1e-12.
class TransitMap {
public:
  static constexpr double kRootTol = 1e-12;

  TransitMap(const Network& net, Horizon horizon) : net_(&net), horizon_(horizon) {}

  const Network& network() const { return *net_; }
  Horizon horizon() const { return horizon_; }

  /// Solves int_{anchor}^{t} lambda_a(s) ds = y for t (y may be negative).
  double invert_integral(ArcId a, double anchor, double y) const;

  /// Arrival time at the head of arc a for a departure at t_dep.
  /// The _within_horizon variant throws OutOfHorizon when the arrival
  /// exceeds T; the plain variant extrapolates (the coefficient families
  /// are globally defined).
  double transit_time(ArcId a, double t_dep) const;
  double transit_time_within_horizon(ArcId a, double t_dep) const;

  /// t~(v_from, v_to, t): arrival at v_to of material leaving v_from at t.
  double node_arrival(NodeId v_from, NodeId v_to, double t) const;
  double node_arrival_within_horizon(NodeId v_from, NodeId v_to, double t) const;

  /// t~^{-1}(v_from, v_to, t_arr): departure time at v_from of material
  /// arriving at v_to at t_arr.
  double injection_time(NodeId v_from, NodeId v_to, double t_arr) const;

  /// exp(-int_{t_a}^{t_b} mu_a), in (0, 1].
  double damping_factor(ArcId a, double t_a, double t_b) const;

  /// gamma_i^r(t): product over the arcs l of eta(v_i, v_r) of
  /// lambda_l(entry)/lambda_l(exit) * exp(+int_entry^exit mu_l), with the
  /// entry/exit times chained along the path from time t at v_i.
  double gamma(NodeId v_i, NodeId v_r, double t) const;

private:
  const Network* net_;
  Horizon horizon_;
};

}  // namespace flownet

#endif
