#ifndef FLOWNET_PDESIM_HPP
#define FLOWNET_PDESIM_HPP

#include <functional>
#include <span>
#include <vector>

#include "flownet/control.hpp"
#include "flownet/transit.hpp"

namespace flownet {

struct GridSpec {
  double dx = 5e-3;
  /// Common node-coupling grid step; <= 0 picks dx / max_t max_l lambda_l(t)
  /// so every arc produces at least one update per common step.
  double dt_common = 0.0;
  /// Damping substep: (1 - dt mu) per the splitting scheme by default
  /// (exact exp(-int mu) behind this flag for the equivalence test).
  bool exact_damping = false;
};

/// Values on a non-uniform increasing time grid (one entry per arc step).
struct StepSeries {
  std::vector<double> times;
  std::vector<double> values;

  double interp(double t) const;   // linear, clamped at the ends
  double step_at(double t) const;  // piecewise-constant left lookup
};

/// Values on the fixed common grid t0 + j dt.
struct UniformSeries {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> values;

  double time(int j) const { return t0 + static_cast<double>(j) * dt; }
  double interp(double t) const;
};

/// One upwind step at CFL exactly 1: pure shift with the boundary density
/// entering the first cell, then the multiplicative damping substep
/// (1 - dt mu). Throws NegativeDampingFactor when dt mu > 1.
void step_arc(std::span<double> cells, double boundary_density, double dt, double mu);

void shift_cells(std::span<double> cells, double boundary_density);
void scale_cells(std::span<double> cells, double factor);

/// Node flux interpolation: end-cell flux z_end lambda sampled
/// on the arc grid, linearly interpolated onto a common-grid time.
double node_influx(const StepSeries& end_flux, double t_common);

/// Boundary density for an outgoing arc at one of its grid times:
/// alpha * (linear interpolation between the bracketing common-grid samples
/// of f / lambda_m, with lambda_m evaluated at those same common times).
double node_outflux_boundary(double alpha, const UniformSeries& flux_over_lambda, double t_arc);

struct Trajectory {
  std::vector<double> times;                 // common grid, t0..T
  std::vector<double> control;               // u resampled (piecewise constant)
  std::vector<std::vector<double>> supply;   // [leaf_slot][time]
  std::vector<std::vector<double>> demand;   // [leaf_slot][time]
  std::vector<double> window_start;          // first arrival per leaf slot
};

/// Advances the whole network over [t0, T]: per-arc adaptive grids with CFL
/// number exactly 1, flux exchange on the common grid, the optimal inflow
/// injected at the source, and per-setting distribution parameters at the
/// inner nodes. Transit tables are precomputed once and shared across Monte
/// Carlo runs; run() is const and safe to call concurrently.
class SimulationEngine {
public:
  SimulationEngine(const Network& net, Horizon horizon, GridSpec spec);

  const Network& network() const { return *net_; }
  const TransitMap& transit() const { return tmap_; }
  Horizon horizon() const { return horizon_; }
  double dt_common() const { return dt_common_; }
  int sample_count() const { return n_common_T_; }  // samples t0..T inclusive
  double sample_time(int j) const { return horizon_.t0 + static_cast<double>(j) * dt_common_; }
  double first_arrival(int leaf_slot) const {
    return first_arrival_[static_cast<std::size_t>(leaf_slot)];
  }

  /// Node coupling state recorded during a run, for diagnostics and the
  /// conservation tests: ingoing flux per node on the common grid and the
  /// flux entering each arc at its own grid times.
  struct CouplingRecord {
    std::vector<UniformSeries> node_influx;  // per node (head of its arc)
    std::vector<StepSeries> arc_inflow;      // per arc
  };

  /// control_override, when given, replaces the optimal-inflow evaluation
  /// (the oracle optimizer drives the forward map with candidate controls).
  /// demand_paths may be empty, in which case the demand series is zero.
  Trajectory run(const DemandModels& models, const ControlPolicy& policy,
                 const ObservationSet& obs,
                 const std::vector<std::vector<double>>& demand_paths,
                 const SampleGrid& sde_grid,
                 const std::function<double(double)>* control_override = nullptr,
                 CouplingRecord* coupling = nullptr) const;

private:
  struct LeafTerm {
    double arrival = 0.0;
    double gamma = 1.0;
    bool within_horizon = true;
  };
  struct ArcTables {
    int n_cells = 0;
    std::vector<double> times;     // arc grid t_0..t_J
    std::vector<double> lambda;    // lambda at those times
    std::vector<double> damp;      // damping factor per step (J entries)
    // inner-node coupling data at times[j], j = 0..J-1 (consumed per step):
    // per leaf of the tail node's demand descendants
    std::vector<std::vector<LeafTerm>> node_terms;
    std::vector<double> info_base;            // t~^{-1}(v0, tail, t_j), clamped to t0
    std::vector<std::vector<int>> leaf_idx;   // per outgoing arc of the tail node
    std::size_t out_pos = 0;                  // position of this arc in outgoing_arcs(tail)
  };

  const Network* net_;
  Horizon horizon_;
  GridSpec spec_;
  TransitMap tmap_;
  double dt_common_ = 0.0;
  int n_common_T_ = 0;      // last sample index with t <= T
  int n_common_pad_ = 0;    // padded grid used for coupling
  std::vector<ArcTables> arcs_;
  std::vector<std::vector<LeafTerm>> inflow_terms_;  // at arc-0 times, per leaf slot
  std::vector<double> first_arrival_;

  double eval_inflow(const DemandModels& models, const ControlPolicy& policy,
                     const ObservationSet& obs, int step) const;
  std::vector<double> eval_alpha(const DemandModels& models, const ControlPolicy& policy,
                                 const ObservationSet& obs, ArcId arc, int step,
                                 double f_in) const;
};

}  // namespace flownet

#endif
