// flownet command line: scenario validation, single-run simulation with CSV
// trajectory export, Monte Carlo error tables, moment checks against Monte
// Carlo, update-frequency reduction studies and the brute-force control
// optimizer.
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flownet/csvio.hpp"
#include "flownet/errors.hpp"
#include "flownet/montecarlo.hpp"
#include "flownet/oracle.hpp"

namespace fs = std::filesystem;
using namespace flownet;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

Scenario load_with_overrides(const std::string& path, const std::string& setting,
                             int profile, const std::string& process) {
  Scenario sc = load_scenario(path);
  if (!setting.empty()) sc.setting = setting_from_name(setting);
  if (profile > 0) sc.damping_profile = profile;
  if (!process.empty()) sc.ou_process = process == "ou";
  sc.validate();
  return sc;
}

void print_report(const ErrorReport& report) {
  std::printf("%-8s %-6s %-8s %-12s %-7s %s\n", "setting", "leaf", "profile", "norm_rmse", "runs",
              "seed");
  for (const ErrorReportRow& r : report.rows)
    std::printf("%-8s v%-5d mu%-6d %-12.6f %-7d %" PRIu64 "\n", setting_name(r.setting), r.leaf,
                r.damping_profile, r.norm_rmse, r.n_runs, static_cast<std::uint64_t>(r.seed));
}

int cmd_validate(const std::string& path) {
  const Scenario sc = load_scenario(path);
  std::printf("scenario '%s': %d arcs, %zu demand nodes, horizon [%g, %g] -- ok\n",
              sc.name.c_str(), static_cast<int>(sc.arcs.size()), sc.demands.size(), sc.horizon.t0,
              sc.horizon.T);
  return 0;
}

int cmd_simulate(const std::string& path, int run_id, const std::string& out_dir,
                 const std::string& setting, int profile, const std::string& process) {
  const Scenario sc = load_with_overrides(path, setting, profile, process);
  const Trajectory traj = simulate_single_run(sc, run_id, sc.seed);
  const Network net = sc.make_network(1);

  std::printf("run %d of '%s' (%s, profile mu%d)\n", run_id, sc.name.c_str(),
              setting_name(sc.setting), sc.damping_profile);
  for (std::size_t s = 0; s < net.demand_nodes().size(); ++s) {
    std::vector<std::vector<double>> sup{traj.supply[s]}, dem{traj.demand[s]};
    const double e = norm_rmse(sup, dem, traj.times, traj.window_start[s], sc.horizon.T);
    std::printf("  leaf v%d: single-run normRMSE = %.6f\n", net.demand_nodes()[s], e);
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const std::string file = out_dir + "/trajectory_" + sc.name + "_" +
                             setting_name(sc.setting) + "_mu" +
                             std::to_string(sc.damping_profile) + "_run" +
                             std::to_string(run_id) + ".csv";
    write_trajectory_csv(file, traj, net.demand_nodes());
    std::printf("  wrote %s\n", file.c_str());
  }
  return 0;
}

int cmd_mc(const std::string& path, int n, std::uint64_t seed, bool has_seed,
           const std::string& out_dir, bool all, const std::string& setting, int profile,
           const std::string& process, int threads) {
  const Scenario sc = load_with_overrides(path, setting, profile, process);
  const int runs = n > 0 ? n : sc.n_runs;
  const std::uint64_t use_seed = has_seed ? seed : sc.seed;
  const auto start = std::chrono::steady_clock::now();
  const ErrorReport report = all ? monte_carlo_full_table(sc, runs, use_seed, threads)
                                 : monte_carlo(sc, runs, use_seed, threads);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  print_report(report);
  std::printf("elapsed: %.1f s\n", secs);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const std::string file = out_dir + "/report_" + sc.name + ".csv";
    write_report_csv(file, report);
    std::printf("wrote %s\n", file.c_str());
  }
  return 0;
}

int cmd_moments_check(const std::string& path, int n_paths, int n_probes, int threads) {
  const Scenario sc = load_scenario(path);
  const DemandModels models = sc.make_models(false);
  const Network net = sc.make_network(1);
  const SampleGrid grid = sc.sde_grid();
  (void)threads;

  bool ok = true;
  for (int s = 0; s < models.leaf_count(); ++s) {
    const JacobiParams& p = models.entry(s).jacobi;
    const auto theta_cache = cache_theta(p.theta, grid);
    std::vector<int> probe_idx;
    for (int k = 1; k <= n_probes; ++k)
      probe_idx.push_back(grid.n_steps * k / n_probes);
    std::vector<double> sum(probe_idx.size(), 0.0), sum2(probe_idx.size(), 0.0),
        sum_sq(probe_idx.size(), 0.0), sum2_sq(probe_idx.size(), 0.0);
    for (int run = 0; run < n_paths; ++run) {
      RandomStream rng = RandomStream::demand_stream(sc.seed ^ 0x5eedf00dULL,
                                                     static_cast<std::uint64_t>(run),
                                                     static_cast<std::uint64_t>(s));
      const auto zpath = simulate_jacobi(p, grid, rng, theta_cache);
      for (std::size_t q = 0; q < probe_idx.size(); ++q) {
        const double z = zpath[static_cast<std::size_t>(probe_idx[q])];
        sum[q] += z;
        sum_sq[q] += z * z;
        sum2[q] += z * z;
        sum2_sq[q] += z * z * z * z;
      }
    }
    std::printf("leaf v%d (kappa=%g sigma=%g d0=%g):\n", net.demand_nodes()[s], p.kappa, p.sigma,
                p.d0);
    std::printf("  %-8s %-12s %-12s %-8s %-12s %-12s %-8s\n", "t", "mean_cf", "mean_mc", "dev/se",
                "m2_cf", "m2_mc", "dev/se");
    for (std::size_t q = 0; q < probe_idx.size(); ++q) {
      const double t = grid.time(probe_idx[q]);
      const double n = static_cast<double>(n_paths);
      const double mc1 = sum[q] / n;
      const double se1 = std::sqrt(std::max(0.0, sum_sq[q] / n - mc1 * mc1) / n);
      const double cf1 = jacobi_mean(p, grid.t0, p.d0, t);
      const double mc2 = sum2[q] / n;
      const double se2 = std::sqrt(std::max(0.0, sum2_sq[q] / n - mc2 * mc2) / n);
      const double cf2 = jacobi_second_moment(p, grid.t0, p.d0, t);
      const double d1 = se1 > 0.0 ? std::abs(mc1 - cf1) / se1 : 0.0;
      const double d2 = se2 > 0.0 ? std::abs(mc2 - cf2) / se2 : 0.0;
      ok = ok && d1 <= 3.0 && d2 <= 3.0;
      std::printf("  %-8.4f %-12.6f %-12.6f %-8.2f %-12.6f %-12.6f %-8.2f\n", t, cf1, mc1, d1, cf2,
                  mc2, d2);
    }
  }
  std::printf("moments-check: %s (3-standard-error bound, %d paths)\n", ok ? "PASS" : "FAIL",
              n_paths);
  return ok ? 0 : kExitNumerical;
}

int cmd_reduction(const std::string& path, const std::string& updates_csv, int n,
                  std::uint64_t seed, bool has_seed, const std::string& out_dir, int threads) {
  const Scenario sc = load_scenario(path);
  std::vector<int> counts;
  std::string token;
  std::istringstream in(updates_csv);
  while (std::getline(in, token, ',')) counts.push_back(std::stoi(token));
  if (counts.empty()) fail(Errc::BadParameter, "no update counts given");
  const int runs = n > 0 ? n : sc.n_runs;
  const std::uint64_t use_seed = has_seed ? seed : sc.seed;
  const ReductionStudy study = error_reduction_study(sc, counts, runs, use_seed, threads);

  for (std::size_t s = 0; s < study.leaves.size(); ++s) {
    std::printf("leaf v%d (baseline normRMSE %.4f):\n", study.leaves[s], study.baseline_rmse[s]);
    std::printf("  %-10s %-18s %-18s\n", "updates", "MS2", "MS3");
    for (std::size_t c = 0; c < study.update_counts.size(); ++c)
      std::printf("  %-10d %6.2f%% (%.4f)   %6.2f%% (%.4f)\n", study.update_counts[c],
                  study.reduction_pct[0][c][s], study.rmse[0][c][s], study.reduction_pct[1][c][s],
                  study.rmse[1][c][s]);
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const std::string file = out_dir + "/reduction_" + sc.name + ".csv";
    write_reduction_csv(file, study);
    std::printf("wrote %s\n", file.c_str());
  }
  return 0;
}

int cmd_oracle(const std::string& path, int points, int profile, const std::string& out_dir) {
  Scenario sc = load_scenario(path);
  const int use_profile = profile > 0 ? profile : sc.damping_profile;
  const OracleResult res = oracle_control_optimizer(sc, use_profile, points);

  const Network net = sc.make_network(use_profile);
  const SimulationEngine engine(net, sc.horizon, GridSpec{.dx = sc.dx, .dt_common = sc.dt_common});
  const Trajectory explicit_traj = explicit_control_trajectory(sc, engine);
  const double explicit_obj = deterministic_objective(sc, engine, explicit_traj);

  std::printf("oracle optimizer on '%s' (profile mu%d, %d control intervals)\n", sc.name.c_str(),
              use_profile, points);
  std::printf("  converged: %s after %d sweeps (stationarity %.2e)\n",
              res.converged ? "yes" : "NO", res.sweeps, res.stationarity);
  std::printf("  objective(oracle)   = %.10f\n", res.objective);
  std::printf("  objective(explicit) = %.10f\n", explicit_obj);

  // L2 comparison of the oracle against the explicit control on its grid
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k + 1 < res.grid_times.size(); ++k) {
    const double mid = 0.5 * (res.grid_times[k] + res.grid_times[k + 1]);
    double uref = 0.0;
    for (std::size_t j = 0; j + 1 < explicit_traj.times.size(); ++j)
      if (explicit_traj.times[j] <= mid && mid < explicit_traj.times[j + 1]) {
        uref = explicit_traj.control[j];
        break;
      }
    num += (res.control[k] - uref) * (res.control[k] - uref);
    den += uref * uref;
  }
  std::printf("  relative L2 distance to explicit control = %.5f\n",
              den > 0.0 ? std::sqrt(num / den) : std::sqrt(num));

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const std::string file = out_dir + "/oracle_" + sc.name + ".csv";
    std::FILE* f = std::fopen(file.c_str(), "w");
    if (!f) fail(Errc::IoError, "cannot write '" + file + "'");
    std::fprintf(f, "t,u\n");
    for (std::size_t k = 0; k + 1 < res.grid_times.size(); ++k)
      std::fprintf(f, "%.17g,%.17g\n", res.grid_times[k], res.control[k]);
    std::fclose(f);
    std::printf("  wrote %s\n", file.c_str());
  }
  if (!res.converged) fail(Errc::NotConverged, "oracle optimizer hit the sweep limit");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transport networks with stochastic demands: explicit optimal inflow controls, "
               "node flux distribution and Monte Carlo error analysis"};
  app.require_subcommand(1);

  std::string path, out_dir, setting, process, updates_csv = "1,2,3,6,12";
  int run_id = 0, n = 0, profile = 0, points = 50, n_paths = 100000, n_probes = 10, threads = 0;
  std::uint64_t seed = 0;

  auto* validate = app.add_subcommand("validate", "validate a scenario file");
  validate->add_option("scenario", path)->required();

  auto* simulate = app.add_subcommand("simulate", "run one simulation and export the trajectory");
  simulate->add_option("scenario", path)->required();
  simulate->add_option("--run-id", run_id, "demand realization index");
  simulate->add_option("--out", out_dir, "output directory for CSV files");
  simulate->add_option("--setting", setting, "MS1|MS2|MS3 override");
  simulate->add_option("--profile", profile, "damping profile override (1|2)");
  simulate->add_option("--process", process, "jacobi|ou override");

  auto* mc = app.add_subcommand("mc", "Monte Carlo normRMSE report");
  mc->add_option("scenario", path)->required();
  mc->add_option("--n", n, "number of runs (default: scenario)");
  auto* seed_opt = mc->add_option("--seed", seed, "master seed (default: scenario)");
  mc->add_option("--out", out_dir, "output directory for CSV files");
  mc->add_flag("--all", "all settings x both damping profiles");
  mc->add_option("--setting", setting);
  mc->add_option("--profile", profile);
  mc->add_option("--process", process);
  mc->add_option("--threads", threads, "worker threads (default: hardware)");

  auto* moments = app.add_subcommand("moments-check", "closed-form moments vs Monte Carlo");
  moments->add_option("scenario", path)->required();
  moments->add_option("--paths", n_paths);
  moments->add_option("--probes", n_probes);

  auto* reduction = app.add_subcommand("reduction-study", "error reduction vs update count");
  reduction->add_option("scenario", path)->required();
  reduction->add_option("--updates", updates_csv, "comma-separated update counts");
  reduction->add_option("--n", n);
  auto* seed_opt2 = reduction->add_option("--seed", seed);
  reduction->add_option("--out", out_dir);
  reduction->add_option("--threads", threads);

  auto* oracle = app.add_subcommand("oracle", "brute-force control optimizer (desk scale)");
  oracle->add_option("scenario", path)->required();
  oracle->add_option("--points", points, "control grid intervals (<= 200)");
  oracle->add_option("--profile", profile);
  oracle->add_option("--out", out_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(path);
    if (simulate->parsed()) return cmd_simulate(path, run_id, out_dir, setting, profile, process);
    if (mc->parsed())
      return cmd_mc(path, n, seed, seed_opt->count() > 0, out_dir, mc->count("--all") > 0, setting,
                    profile, process, threads);
    if (moments->parsed()) return cmd_moments_check(path, n_paths, n_probes, threads);
    if (reduction->parsed())
      return cmd_reduction(path, updates_csv, n, seed, seed_opt2->count() > 0, out_dir, threads);
    if (oracle->parsed()) return cmd_oracle(path, points, profile, out_dir);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.is_validation() ? kExitValidation : kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return 0;
}
