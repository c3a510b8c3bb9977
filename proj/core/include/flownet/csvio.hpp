#ifndef FLOWNET_CSVIO_HPP
#define FLOWNET_CSVIO_HPP

#include <string>

#include "flownet/montecarlo.hpp"

namespace flownet {

/// Trajectory CSV: header t,u,supply_v<i>,demand_v<i>,... one column pair
/// per demand leaf; floats with 17 significant digits (lossless round trip).
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<NodeId>& leaf_nodes);
Trajectory read_trajectory_csv(const std::string& path,
                               std::vector<NodeId>* leaf_nodes = nullptr);

/// Report CSV: setting,leaf,damping_profile,norm_rmse,n_runs,seed.
void write_report_csv(const std::string& path, const ErrorReport& report);
ErrorReport read_report_csv(const std::string& path);

/// Reduction-study CSV: setting,leaf,updates,norm_rmse,reduction_pct.
void write_reduction_csv(const std::string& path, const ReductionStudy& study);

}  // namespace flownet

#endif
