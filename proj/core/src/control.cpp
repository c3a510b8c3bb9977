#include "flownet/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flownet/errors.hpp"

namespace flownet {

const char* setting_name(ModelSetting s) {
  switch (s) {
    case ModelSetting::MS1: return "MS1";
    case ModelSetting::MS2: return "MS2";
    case ModelSetting::MS3: return "MS3";
  }
  return "?";
}

ModelSetting setting_from_name(const std::string& name) {
  if (name == "MS1") return ModelSetting::MS1;
  if (name == "MS2") return ModelSetting::MS2;
  if (name == "MS3") return ModelSetting::MS3;
  fail(Errc::SchemaError, "unknown model setting '" + name + "'");
}

UpdateSchedule UpdateSchedule::uniform(double t0, double T, int n_updates) {
  UpdateSchedule s;
  s.times.push_back(t0);
  const double step = (T - t0) / static_cast<double>(n_updates + 1);
  for (int j = 1; j <= n_updates; ++j) s.times.push_back(t0 + step * static_cast<double>(j));
  return s;
}

void UpdateSchedule::check() const {
  if (times.empty()) fail(Errc::SchemaError, "update schedule must contain t0");
  for (std::size_t j = 1; j < times.size(); ++j)
    if (times[j] <= times[j - 1]) fail(Errc::SchemaError, "update times must be strictly increasing");
}

int UpdateSchedule::floor_index(double s) const {
  auto it = std::upper_bound(times.begin(), times.end(), s);
  if (it == times.begin()) return 0;  // s precedes t0: only the initial information exists
  return static_cast<int>(it - times.begin()) - 1;
}

double DemandModels::initial_value(int slot) const {
  const Entry& e = entry(slot);
  if (e.is_ou) return e.ou.z0;
  return e.jacobi.lo + (e.jacobi.hi - e.jacobi.lo) * e.jacobi.d0;
}

double DemandModels::conditional_mean(int slot, double t_obs, double observed, double t) const {
  const Entry& e = entry(slot);
  if (e.is_ou) return ou_mean(e.ou, t_obs, observed, t);
  return jacobi_mean_in_range(e.jacobi, t_obs, observed, t);
}

ObservationSet ObservationSet::from_paths(const std::vector<std::vector<double>>& paths,
                                          const SampleGrid& grid, const UpdateSchedule& schedule) {
  ObservationSet obs;
  obs.values.resize(paths.size());
  for (std::size_t leaf = 0; leaf < paths.size(); ++leaf) {
    obs.values[leaf].reserve(schedule.times.size());
    for (double t_hat : schedule.times)
      obs.values[leaf].push_back(paths[leaf][static_cast<std::size_t>(grid.index_at(t_hat))]);
  }
  return obs;
}

ObservationSet ObservationSet::initial_only(const DemandModels& models) {
  ObservationSet obs;
  obs.values.resize(static_cast<std::size_t>(models.leaf_count()));
  for (int slot = 0; slot < models.leaf_count(); ++slot)
    obs.values[static_cast<std::size_t>(slot)] = {models.initial_value(slot)};
  return obs;
}

double optimal_inflow(const TransitMap& tmap, const DemandModels& models,
                      const ControlPolicy& policy, const ObservationSet& obs, double t_in) {
  const Network& net = tmap.network();
  const double T = tmap.horizon().T;
  const int info_idx = policy.injection_info_index(t_in);
  const double t_hat = policy.schedule.times[static_cast<std::size_t>(info_idx)];

  double u = 0.0;
  for (NodeId leaf : net.demand_nodes()) {
    const double arrival = tmap.node_arrival(net.source(), leaf, t_in);
    if (arrival > T + TransitMap::kRootTol) continue;  // delivered after the horizon
    const int slot = net.leaf_slot(leaf);
    const double observed = obs.values[static_cast<std::size_t>(slot)][static_cast<std::size_t>(info_idx)];
    const double expected = models.conditional_mean(slot, t_hat, observed, arrival);
    u += tmap.gamma(net.source(), leaf, t_in) * expected;
  }
  return u;
}

namespace {

// leaf shares rooted at node v for one distribution decision at time t
std::vector<LeafShare> node_leaf_shares(const TransitMap& tmap, const DemandModels& models,
                                        const ObservationSet& obs, NodeId v, double t,
                                        double t_hat, int info_idx) {
  const Network& net = tmap.network();
  const auto& leaves = net.demand_descendants(v);
  std::vector<LeafShare> shares(leaves.size());
  for (std::size_t r = 0; r < leaves.size(); ++r) {
    const int slot = net.leaf_slot(leaves[r]);
    const double arrival = tmap.node_arrival(v, leaves[r], t);
    const double observed = obs.values[static_cast<std::size_t>(slot)][static_cast<std::size_t>(info_idx)];
    shares[r].gamma = tmap.gamma(v, leaves[r], t);
    shares[r].expected = models.conditional_mean(slot, t_hat, observed, arrival);
    shares[r].within_horizon = arrival <= tmap.horizon().T + TransitMap::kRootTol;
  }
  return shares;
}

std::vector<std::vector<int>> arc_leaf_indices(const Network& net, NodeId v) {
  const auto& leaves = net.demand_descendants(v);
  const auto& out = net.outgoing_arcs(v);
  std::vector<std::vector<int>> idx(out.size());
  for (std::size_t ki = 0; ki < out.size(); ++ki)
    for (NodeId leaf : net.demand_descendants(net.arc(out[ki]).head))
      idx[ki].push_back(static_cast<int>(std::lower_bound(leaves.begin(), leaves.end(), leaf) -
                                         leaves.begin()));
  return idx;
}

}  // namespace

std::vector<double> alpha_from_shares(const std::vector<std::vector<LeafShare>>& per_arc) {
  const auto n_arcs = per_arc.size();
  bool any_within = false;
  for (const auto& arc : per_arc)
    for (const LeafShare& s : arc) any_within = any_within || s.within_horizon;

  std::vector<double> shares(n_arcs, 0.0);
  double total = 0.0;
  for (std::size_t ki = 0; ki < n_arcs; ++ki) {
    for (const LeafShare& s : per_arc[ki])
      if (s.within_horizon || !any_within) shares[ki] += s.gamma * s.expected;
    total += shares[ki];
  }
  if (total <= 0.0) return std::vector<double>(n_arcs, 1.0 / static_cast<double>(n_arcs));
  for (double& a : shares) a /= total;
  return shares;
}

Ms3Allocation ms3_from_shares(const std::vector<LeafShare>& leaves,
                              const std::vector<std::vector<int>>& arc_leaf_idx, double f_in) {
  double gamma_sq_all = 0.0, gamma_sq_out = 0.0, weighted_sum = 0.0;
  bool any_out = false, any_in = false;
  for (const LeafShare& s : leaves) {
    gamma_sq_all += s.gamma * s.gamma;
    weighted_sum += s.gamma * s.expected;
    if (s.within_horizon)
      any_in = true;
    else {
      any_out = true;
      gamma_sq_out += s.gamma * s.gamma;
    }
  }
  const double residual = f_in - weighted_sum;
  // deliveries past the horizon enter no objective, so those leaves absorb
  // the flux-balance slack and the in-horizon supplies match the expected
  // demands exactly; with every leaf in horizon this is Lemma 5.2 verbatim
  const bool slack_to_out = any_out && any_in;
  const double slack_norm = slack_to_out ? gamma_sq_out : gamma_sq_all;

  Ms3Allocation alloc;
  alloc.m.resize(leaves.size());
  for (std::size_t r = 0; r < leaves.size(); ++r) {
    const LeafShare& s = leaves[r];
    const bool takes_slack = !slack_to_out || !s.within_horizon;
    alloc.m[r] = s.expected + (takes_slack ? s.gamma / slack_norm * residual : 0.0);
  }

  // per-arc flux shares; their sum telescopes to f_in
  std::vector<double> flux(arc_leaf_idx.size(), 0.0);
  double flux_sum = 0.0;
  for (std::size_t ki = 0; ki < arc_leaf_idx.size(); ++ki) {
    for (int r : arc_leaf_idx[ki])
      flux[ki] += leaves[static_cast<std::size_t>(r)].gamma * alloc.m[static_cast<std::size_t>(r)];
    flux_sum += flux[ki];
  }
  if (std::abs(flux_sum) < 1e-12) {
    // empty-network startup: the routed flux is zero either way; fall back
    // to the expected-demand shares (the balanced-inflow limit)
    std::vector<std::vector<LeafShare>> per_arc(arc_leaf_idx.size());
    for (std::size_t ki = 0; ki < arc_leaf_idx.size(); ++ki)
      for (int r : arc_leaf_idx[ki]) per_arc[ki].push_back(leaves[static_cast<std::size_t>(r)]);
    alloc.alpha = alpha_from_shares(per_arc);
    return alloc;
  }
  for (double& f : flux) f /= flux_sum;
  alloc.alpha = clamp_alphas(std::move(flux));
  return alloc;
}

std::vector<double> alpha_values(const TransitMap& tmap, const DemandModels& models,
                                 const ControlPolicy& policy, const ObservationSet& obs, NodeId v,
                                 double t) {
  const Network& net = tmap.network();
  if (net.kind(v) != NodeKind::Inner)
    fail(Errc::NoSuchPath, "node " + std::to_string(v) + " is not an inner node");

  int info_idx = 0;
  if (policy.setting != ModelSetting::MS1) {
    // information available when the material now at v entered the network;
    // clamped to t0 for material that predates the horizon start
    const double injected = tmap.injection_time(net.source(), v, t);
    info_idx = policy.schedule.floor_index(std::max(injected, policy.schedule.times.front()));
  }
  const double t_hat = policy.schedule.times[static_cast<std::size_t>(info_idx)];

  const std::vector<LeafShare> shares = node_leaf_shares(tmap, models, obs, v, t, t_hat, info_idx);
  const auto idx = arc_leaf_indices(net, v);
  std::vector<std::vector<LeafShare>> per_arc(idx.size());
  for (std::size_t ki = 0; ki < idx.size(); ++ki)
    for (int r : idx[ki]) per_arc[ki].push_back(shares[static_cast<std::size_t>(r)]);
  return alpha_from_shares(per_arc);
}

Ms3Allocation ms3_allocation(const TransitMap& tmap, const DemandModels& models,
                             const ControlPolicy& policy, const ObservationSet& obs, NodeId v,
                             double f_in, double t) {
  const Network& net = tmap.network();
  const int info_idx = policy.setting == ModelSetting::MS1 ? 0 : policy.schedule.floor_index(t);
  const double t_hat = policy.schedule.times[static_cast<std::size_t>(info_idx)];
  const std::vector<LeafShare> shares = node_leaf_shares(tmap, models, obs, v, t, t_hat, info_idx);
  return ms3_from_shares(shares, arc_leaf_indices(net, v), f_in);
}

std::vector<double> clamp_alphas(std::vector<double> alphas) {
  double positive_sum = 0.0;
  bool any_negative = false;
  for (double a : alphas) {
    if (a < 0.0)
      any_negative = true;
    else
      positive_sum += a;
  }
  if (!any_negative) return alphas;
  if (positive_sum <= 0.0) fail(Errc::AllNegative, "no positive distribution parameter to rescale");
  for (double& a : alphas) a = a < 0.0 ? 0.0 : a / positive_sum;
  return alphas;
}

}  // namespace flownet
