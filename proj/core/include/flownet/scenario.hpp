#ifndef FLOWNET_SCENARIO_HPP
#define FLOWNET_SCENARIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "flownet/control.hpp"
#include "flownet/netgraph.hpp"

namespace flownet {

struct ScenarioArc {
  int id = 0;  // 1-based label; arc i terminates at node v_i
  NodeId from = 0, to = 0;
  double length = 1.0;
  CoefFn velocity;
  CoefFn damping[2];  // the two damping profiles mu^1, mu^2
};

struct ScenarioDemand {
  NodeId node = 0;
  JacobiParams jacobi;
  double ou_sigma = -1.0;  // sigma_hat for the OU comparison; < 0 if absent
};

/// Everything a numerical experiment needs: network, coefficient profiles,
/// demand parameters, horizon, discretization, information setting and
/// Monte Carlo configuration. Loaded from a JSON document.
struct Scenario {
  std::string name = "scenario";
  Horizon horizon;
  double dx = 5e-3;
  double dt_sde = 1e-4;
  double dt_common = 0.0;  // <= 0: dx / max lambda
  int n_runs = 500;
  std::uint64_t seed = 1;
  ModelSetting setting = ModelSetting::MS1;
  int updates = 0;
  std::vector<double> update_times;  // optional explicit schedule (without t0)
  int damping_profile = 1;           // 1 or 2
  bool ou_process = false;
  std::vector<ScenarioArc> arcs;
  std::vector<ScenarioDemand> demands;

  Network make_network(int profile) const;
  DemandModels make_models(bool ou) const;
  UpdateSchedule make_schedule() const;
  UpdateSchedule make_schedule(int update_count) const;
  SampleGrid sde_grid() const;
  const ScenarioDemand& demand_for(NodeId node) const;

  /// Schema- and network-level validation; throws Error.
  void validate() const;
};

Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);

}  // namespace flownet

#endif
