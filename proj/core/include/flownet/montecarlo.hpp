#ifndef FLOWNET_MONTECARLO_HPP
#define FLOWNET_MONTECARLO_HPP

#include <span>

#include "flownet/pdesim.hpp"
#include "flownet/scenario.hpp"

namespace flownet {

/// One experimental configuration evaluated on shared demand realizations
/// (common random numbers): the same Brownian increments drive every
/// variant and the Jacobi/OU comparison within a run.
struct Variant {
  std::string label;
  ModelSetting setting = ModelSetting::MS1;
  int profile = 1;
  UpdateSchedule schedule;
  bool ou = false;
};

struct VariantResult {
  std::string label;
  ModelSetting setting = ModelSetting::MS1;
  int profile = 1;
  bool ou = false;
  int n_runs = 0;
  std::uint64_t seed = 0;
  std::vector<double> norm_rmse;             // per leaf slot
  std::vector<std::vector<double>> mean_sq;  // [leaf slot][sample]: E[(D-f)^2]
};

std::vector<VariantResult> monte_carlo_multi(const Scenario& sc, std::span<const Variant> variants,
                                             int n_runs, std::uint64_t seed, int n_threads = 0);

struct ErrorReportRow {
  ModelSetting setting = ModelSetting::MS1;
  NodeId leaf = 0;
  int damping_profile = 1;
  double norm_rmse = 0.0;
  int n_runs = 0;
  std::uint64_t seed = 0;
};

struct ErrorReport {
  std::vector<ErrorReportRow> rows;
  double elapsed_seconds = 0.0;
};

/// Monte Carlo experiment for the scenario's configured setting and profile.
ErrorReport monte_carlo(const Scenario& sc, int n_runs, std::uint64_t seed, int n_threads = 0);

/// All three settings under both damping profiles (the full error table).
ErrorReport monte_carlo_full_table(const Scenario& sc, int n_runs, std::uint64_t seed,
                                   int n_threads = 0);

/// Normalized root mean squared error: at each common-grid time in
/// [t_first, T] the sample average of (D - f)^2 over runs, square root,
/// rectangular rule, normalized by (T - t_first).
double norm_rmse(std::span<const std::vector<double>> supply_runs,
                 std::span<const std::vector<double>> demand_runs, std::span<const double> times,
                 double t_first, double T);
double norm_rmse_from_mean_sq(std::span<const double> mean_sq, std::span<const double> times,
                              double t_first, double T);

struct ReductionStudy {
  std::vector<NodeId> leaves;
  std::vector<int> update_counts;
  std::vector<double> baseline_rmse;  // per leaf slot, no updates (MS1)
  // [setting: 0=MS2, 1=MS3][update count index][leaf slot]
  std::vector<std::vector<std::vector<double>>> rmse;
  std::vector<std::vector<std::vector<double>>> reduction_pct;
};

/// Percentage reduction of normRMSE vs the no-update baseline for MS2 and
/// MS3, paired on the same demand realizations per update count.
ReductionStudy error_reduction_study(const Scenario& sc, std::span<const int> update_counts,
                                     int n_runs, std::uint64_t seed, int n_threads = 0);

struct OuComparisonResult {
  int n_runs = 0;
  int ou_negative_paths = 0;      // OU paths attaining a negative value
  int jacobi_out_of_bounds = 0;   // Jacobi paths leaving [lo, hi] (should be 0)
  double ou_min_value = 0.0;
};

/// Drives Jacobi and OU paths with the same normal draws per (run, node)
/// and reports boundary behaviour.
OuComparisonResult ou_comparison(const Scenario& sc, int n_runs, std::uint64_t seed);

/// One simulation run (for trajectory export); run_id selects the demand
/// realization stream.
Trajectory simulate_single_run(const Scenario& sc, int run_id, std::uint64_t seed);

}  // namespace flownet

#endif
