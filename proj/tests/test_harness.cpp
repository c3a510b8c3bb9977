#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "flownet/csvio.hpp"
#include "flownet/errors.hpp"
#include "flownet/montecarlo.hpp"
#include "test_support.hpp"

using namespace flownet;
using doctest::Approx;

#ifndef FLOWNET_SCENARIO_DIR
#define FLOWNET_SCENARIO_DIR "scenarios"
#endif

namespace {

std::string scenario_path(const char* name) {
  return std::string(FLOWNET_SCENARIO_DIR) + "/" + name;
}

Scenario small_table2(int n_runs = 8) {
  Scenario sc = load_scenario(scenario_path("table2.json"));
  sc.n_runs = n_runs;
  return sc;
}

}  // namespace

TEST_CASE("bundled scenarios load with their configured parameters") {
  const Scenario t1 = load_scenario(scenario_path("table1.json"));
  CHECK(t1.dx == 5e-3);
  CHECK(t1.dt_sde == 1e-4);
  CHECK(t1.n_runs == 500);
  CHECK(t1.horizon.T == 2.5);
  CHECK(t1.arcs[0].velocity(0.7) == 14.0);
  CHECK(t1.demands[0].jacobi.kappa == 0.0);
  CHECK(t1.demands[0].jacobi.d0 == 0.4);
  CHECK(t1.arcs[2].damping[1](0.0) == 0.4);

  const Scenario t2 = load_scenario(scenario_path("table2.json"));
  CHECK(t2.demands[0].jacobi.sigma == Approx(2.25));
  CHECK(t2.demands[1].jacobi.sigma == Approx(1.5));
  CHECK(t2.demands[0].ou_sigma == Approx(0.14));
  CHECK(t2.arcs[0].velocity(0.25) == Approx(15.0));  // 14 + sin(pi/2)
  CHECK(t2.updates == 6);

  const Scenario ou = load_scenario(scenario_path("table2_ou.json"));
  CHECK(ou.ou_process);
}

TEST_CASE("schema errors carry the offending field path") {
  const char* missing_velocity = R"({
    "arcs": [ {"id": 1, "from": 0, "to": 1} ],
    "demands": [ {"node": 1, "kappa": 1, "sigma": 0.5, "d0": 0.4,
                  "theta": {"kind": "const", "value": 0.5}} ]
  })";
  CHECK_THROWS_WITH_AS(scenario_from_json_text(missing_velocity),
                       doctest::Contains("arcs[0].velocity"), Error);

  CHECK_THROWS_WITH_AS(scenario_from_json_text("{ not json"), doctest::Contains("ParseError"),
                       Error);

  // demand attached to an inner node
  const char* bad_node = R"({
    "arcs": [ {"id": 1, "from": 0, "to": 1, "velocity": 10},
              {"id": 2, "from": 1, "to": 2, "velocity": 10} ],
    "demands": [ {"node": 1, "kappa": 1, "sigma": 0.5, "d0": 0.4,
                  "theta": {"kind": "const", "value": 0.5}} ]
  })";
  CHECK_THROWS_AS(scenario_from_json_text(bad_node), Error);
}

TEST_CASE("norm_rmse on synthetic sample sets") {
  const std::vector<double> times{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};

  // supply identical to demand in every sample: zero error
  std::vector<std::vector<double>> supply{{1, 2, 3, 4, 5, 6}, {2, 2, 2, 2, 2, 2}};
  CHECK(norm_rmse(supply, supply, times, 0.0, 0.5) == 0.0);

  // constant gap g in every sample: normRMSE ~ g (rectangle count vs window)
  std::vector<std::vector<double>> demand = supply;
  for (auto& run : demand)
    for (double& x : run) x += 0.25;
  const double e = norm_rmse(supply, demand, times, 0.0, 0.5);
  CHECK(e == Approx(0.25 * 6.0 * 0.1 / 0.5).epsilon(1e-13));

  CHECK_THROWS_WITH_AS(norm_rmse(supply, demand, times, 0.6, 0.5), doctest::Contains("EmptyWindow"),
                       Error);
}

TEST_CASE("monte carlo with one run and zero noise equals the single deterministic run") {
  Scenario sc = load_scenario(scenario_path("table1.json"));  // sigma = 0
  const ErrorReport report = monte_carlo(sc, 1, sc.seed, 1);
  const Trajectory traj = simulate_single_run(sc, 0, sc.seed);
  REQUIRE(report.rows.size() == 2);
  for (std::size_t s = 0; s < 2; ++s) {
    std::vector<std::vector<double>> sup{traj.supply[s]}, dem{traj.demand[s]};
    const double direct =
        norm_rmse(sup, dem, traj.times, traj.window_start[s], sc.horizon.T);
    CHECK(report.rows[s].norm_rmse == Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("identical seeds give bit-identical reports for any worker count") {
  const Scenario sc = small_table2(6);
  const ErrorReport a = monte_carlo(sc, 6, 77, 1);
  const ErrorReport b = monte_carlo(sc, 6, 77, 2);
  const ErrorReport c = monte_carlo(sc, 6, 77, 3);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].norm_rmse == b.rows[i].norm_rmse);  // exact, not approximate
    CHECK(a.rows[i].norm_rmse == c.rows[i].norm_rmse);
  }
  // and a different seed actually changes the result
  const ErrorReport d = monte_carlo(sc, 6, 78, 2);
  CHECK(d.rows[0].norm_rmse != a.rows[0].norm_rmse);
}

TEST_CASE("reduction study: zero updates reduce nothing, updates pair on common draws") {
  Scenario sc = small_table2();
  const std::vector<int> counts{0, 2};
  const ReductionStudy study = error_reduction_study(sc, counts, 8, 5, 2);
  REQUIRE(study.update_counts == std::vector<int>{0, 2});
  for (std::size_t s = 0; s < study.leaves.size(); ++s) {
    CHECK(study.reduction_pct[0][0][s] == 0.0);  // MS2, no update
    CHECK(study.reduction_pct[1][0][s] == 0.0);  // MS3, no update
    CHECK(study.rmse[0][1][s] < study.baseline_rmse[s]);  // updates help
  }
}

TEST_CASE("ou comparison: negative OU paths, Jacobi stays in bounds") {
  const Scenario sc = load_scenario(scenario_path("table2.json"));
  const OuComparisonResult res = ou_comparison(sc, 40, 11);
  CHECK(res.ou_negative_paths >= 1);
  CHECK(res.jacobi_out_of_bounds == 0);
  CHECK(res.ou_min_value < 0.0);
}

TEST_CASE("trajectory CSV schema and exact round trip") {
  Scenario sc = load_scenario(scenario_path("table2.json"));
  sc.setting = ModelSetting::MS2;
  const Trajectory traj = simulate_single_run(sc, 3, sc.seed);
  const Network net = sc.make_network(1);

  const std::string path = (std::filesystem::temp_directory_path() / "flownet_traj.csv").string();
  write_trajectory_csv(path, traj, net.demand_nodes());

  // header per the export schema
  std::FILE* f = std::fopen(path.c_str(), "r");
  REQUIRE(f);
  char line[128] = {0};
  REQUIRE(std::fgets(line, sizeof line, f));
  std::fclose(f);
  CHECK(std::string(line) == "t,u,supply_v2,demand_v2,supply_v3,demand_v3\n");

  std::vector<NodeId> leaves;
  const Trajectory back = read_trajectory_csv(path, &leaves);
  CHECK(leaves == net.demand_nodes());
  REQUIRE(back.times.size() == traj.times.size());
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    CHECK(back.times[j] == traj.times[j]);  // 17 significant digits round-trip exactly
    CHECK(back.control[j] == traj.control[j]);
    CHECK(back.supply[0][j] == traj.supply[0][j]);
    CHECK(back.demand[1][j] == traj.demand[1][j]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("report CSV round trip") {
  ErrorReport report;
  report.rows.push_back({ModelSetting::MS1, 2, 1, 0.357912345678, 500, 2024});
  report.rows.push_back({ModelSetting::MS3, 3, 2, 0.251712345678, 500, 2024});
  const std::string path = (std::filesystem::temp_directory_path() / "flownet_report.csv").string();
  write_report_csv(path, report);
  const ErrorReport back = read_report_csv(path);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].setting == ModelSetting::MS1);
  CHECK(back.rows[0].leaf == 2);
  CHECK(back.rows[0].norm_rmse == report.rows[0].norm_rmse);
  CHECK(back.rows[1].damping_profile == 2);
  CHECK(back.rows[1].seed == 2024);
  std::filesystem::remove(path);
}

TEST_CASE("update schedule from explicit times") {
  Scenario sc = small_table2();
  sc.update_times = {0.5, 1.5};
  const UpdateSchedule s = sc.make_schedule();
  REQUIRE(s.times.size() == 3);
  CHECK(s.times[0] == 0.0);
  CHECK(s.times[2] == 1.5);
}

TEST_CASE("piecewise-constant coefficients parse from scenario files") {
  const char* text = R"({
    "arcs": [ {"id": 1, "from": 0, "to": 1,
               "velocity": {"kind": "pwc", "breaks": [1.0], "values": [10, 12]}},
              {"id": 2, "from": 1, "to": 2, "velocity": 11} ],
    "demands": [ {"node": 2, "kappa": 1, "sigma": 0.5, "d0": 0.4,
                  "theta": {"kind": "pwc", "breaks": [0.8, 1.6], "values": [0.3, 0.6, 0.45]}} ]
  })";
  const Scenario sc = scenario_from_json_text(text);
  CHECK(sc.arcs[0].velocity(0.5) == 10.0);
  CHECK(sc.arcs[0].velocity(1.5) == 12.0);
  CHECK(sc.arcs[1].velocity(0.0) == 11.0);  // bare-number shorthand
  CHECK(sc.demands[0].jacobi.theta(1.0) == 0.6);
}
