#ifndef FLOWNET_CONTROL_HPP
#define FLOWNET_CONTROL_HPP

#include <string>
#include <vector>

#include "flownet/demand.hpp"
#include "flownet/transit.hpp"

namespace flownet {

/// Information regimes: MS1 uses only the initial demand observation, MS2
/// re-conditions the injection on a schedule of demand updates, MS3
/// additionally re-optimizes the flux distribution at the inner nodes.
enum class ModelSetting { MS1, MS2, MS3 };

const char* setting_name(ModelSetting s);
ModelSetting setting_from_name(const std::string& name);

struct UpdateSchedule {
  std::vector<double> times;  // strictly increasing, first entry is t0

  static UpdateSchedule initial_only(double t0) { return {{t0}}; }
  /// t0 plus n evenly spaced updates at t0 + j (T - t0)/(n+1), j = 1..n
  /// (6 updates on [0, 2.5] gives an update interval of 5/14).
  static UpdateSchedule uniform(double t0, double T, int n_updates);

  void check() const;
  /// Largest update time <= s (closed on the left; s = t_hat_j maps to itself).
  double floor_time(double s) const { return times[static_cast<std::size_t>(floor_index(s))]; }
  int floor_index(double s) const;
};

/// Per-leaf demand processes, ordered like Network::demand_nodes(). Controls
/// only ever consult the conditional mean, so Jacobi and OU demands share
/// this surface.
class DemandModels {
public:
  struct Entry {
    bool is_ou = false;
    JacobiParams jacobi;
    OuParams ou;
  };

  explicit DemandModels(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  int leaf_count() const { return static_cast<int>(entries_.size()); }
  const Entry& entry(int slot) const { return entries_[static_cast<std::size_t>(slot)]; }

  double initial_value(int slot) const;
  /// E[D_t | D_{t_obs} = observed] on the demand's own scale.
  double conditional_mean(int slot, double t_obs, double observed, double t) const;

private:
  std::vector<Entry> entries_;
};

/// Observed demand values per leaf slot at each schedule time.
struct ObservationSet {
  std::vector<std::vector<double>> values;  // [leaf_slot][schedule index]

  static ObservationSet from_paths(const std::vector<std::vector<double>>& paths,
                                   const SampleGrid& grid, const UpdateSchedule& schedule);
  static ObservationSet initial_only(const DemandModels& models);
};

struct ControlPolicy {
  ModelSetting setting = ModelSetting::MS1;
  UpdateSchedule schedule;

  /// Conditioning time for an injection at t_in: t0 for MS1, the latest
  /// update time <= t_in otherwise.
  double injection_info_time(double t_in) const {
    return setting == ModelSetting::MS1 ? schedule.times.front() : schedule.floor_time(t_in);
  }
  int injection_info_index(double t_in) const {
    return setting == ModelSetting::MS1 ? 0 : schedule.floor_index(t_in);
  }
};

/// Optimal source inflow u(t_in): sum over demand leaves of the conditional
/// expected demand at the leaf arrival time, scaled by the velocity-ratio
/// and damping compensation gamma along the path. Leaves whose arrival
/// falls after T are omitted (the min{.,T} truncation).
double optimal_inflow(const TransitMap& tmap, const DemandModels& models,
                      const ControlPolicy& policy, const ObservationSet& obs, double t_in);

/// One demand leaf's contribution to a distribution decision at a node:
/// the compensation factor, the conditional expected demand at the leaf
/// arrival time, and whether that arrival still falls inside the horizon.
/// Deliveries past T enter no objective, so out-of-horizon leaves are
/// dropped from the expectation shares and serve as free slack in the
/// Lemma 5.2 allocation.
struct LeafShare {
  double gamma = 1.0;
  double expected = 0.0;
  bool within_horizon = true;
};

/// MS1/MS2 distribution parameters from gamma-weighted expected shares
/// grouped per outgoing arc. Falls back to the untruncated shares when
/// every leaf is out of horizon (the routing is then irrelevant), and to an
/// even split when the shares vanish.
std::vector<double> alpha_from_shares(const std::vector<std::vector<LeafShare>>& per_arc);

struct Ms3Allocation {
  std::vector<double> m;      // optimal leaf supplies, ordered like demand_descendants(v)
  std::vector<double> alpha;  // clamped distribution parameters, ordered like outgoing_arcs(v)
};

/// Lemma 5.2 allocation from the shares of all demand descendants of the
/// node (ordered like demand_descendants), the per-arc leaf index lists and
/// the ingoing flux. Out-of-horizon leaves carry the flux-balance slack:
/// their deliveries cost nothing, so in-horizon supplies match the expected
/// demands exactly.
Ms3Allocation ms3_from_shares(const std::vector<LeafShare>& leaves,
                              const std::vector<std::vector<int>>& arc_leaf_idx, double f_in);

/// MS1/MS2 distribution parameters at inner node v for time t, ordered like
/// outgoing_arcs(v). MS1 conditions at t0; MS2 at the latest update before
/// the time the material now at v was injected at the source.
std::vector<double> alpha_values(const TransitMap& tmap, const DemandModels& models,
                                 const ControlPolicy& policy, const ObservationSet& obs, NodeId v,
                                 double t);

/// Lemma 5.2 closed form: m_i^r = E_r + gamma_r / sum(gamma_c^2) * (f_in -
/// sum gamma_c E_c), alphas from the per-arc flux shares, negatives clamped.
Ms3Allocation ms3_allocation(const TransitMap& tmap, const DemandModels& models,
                             const ControlPolicy& policy, const ObservationSet& obs, NodeId v,
                             double f_in, double t);

/// Sets negative entries to zero and rescales the positive ones
/// proportionally; input must sum to 1.
std::vector<double> clamp_alphas(std::vector<double> alphas);

}  // namespace flownet

#endif
