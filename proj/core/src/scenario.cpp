#include "flownet/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "flownet/errors.hpp"
#include "json.hpp"

namespace flownet {

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& path, const std::string& what) {
  fail(Errc::SchemaError, path + ": " + what);
}

const json& require_field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) schema_fail(path + "." + key, "missing");
  return j.at(key);
}

double require_number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require_field(j, key, path);
  if (!v.is_number()) schema_fail(path + "." + key, "expected a number");
  return v.get<double>();
}

double optional_number(const json& j, const std::string& key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return j.at(key).get<double>();
}

CoefFn parse_coef(const json& j, const std::string& path) {
  if (!j.is_object()) {
    if (j.is_number()) return CoefFn::constant(j.get<double>());  // shorthand
    schema_fail(path, "expected a coefficient object or a number");
  }
  const std::string kind = require_field(j, "kind", path).get<std::string>();
  if (kind == "const") return CoefFn::constant(require_number(j, "value", path));
  if (kind == "sin")
    return CoefFn::sinusoid(require_number(j, "base", path), require_number(j, "amp", path),
                            require_number(j, "omega", path), optional_number(j, "phase", 0.0));
  if (kind == "pwc") {
    const json& breaks = require_field(j, "breaks", path);
    const json& values = require_field(j, "values", path);
    if (!breaks.is_array() || !values.is_array()) schema_fail(path, "breaks/values must be arrays");
    return CoefFn::piecewise_constant(breaks.get<std::vector<double>>(),
                                      values.get<std::vector<double>>());
  }
  schema_fail(path + ".kind", "unknown coefficient kind '" + kind + "'");
}

Scenario parse(const json& doc) {
  if (!doc.is_object()) fail(Errc::SchemaError, "top level must be an object");
  Scenario sc;
  sc.name = doc.value("name", std::string("scenario"));
  if (doc.contains("horizon")) {
    const json& h = doc.at("horizon");
    sc.horizon.t0 = optional_number(h, "t0", 0.0);
    sc.horizon.T = optional_number(h, "T", 2.5);
  }
  if (doc.contains("numerics")) {
    const json& n = doc.at("numerics");
    sc.dx = optional_number(n, "dx", sc.dx);
    sc.dt_sde = optional_number(n, "dt_sde", sc.dt_sde);
    sc.dt_common = optional_number(n, "dt_common", sc.dt_common);
    sc.n_runs = static_cast<int>(optional_number(n, "n_runs", sc.n_runs));
    sc.seed = static_cast<std::uint64_t>(optional_number(n, "seed", 1.0));
  }
  if (doc.contains("setting")) sc.setting = setting_from_name(doc.at("setting").get<std::string>());
  if (doc.contains("updates")) sc.updates = doc.at("updates").get<int>();
  if (doc.contains("update_times")) sc.update_times = doc.at("update_times").get<std::vector<double>>();
  sc.damping_profile = static_cast<int>(optional_number(doc, "damping_profile", 1.0));
  if (doc.contains("process")) {
    const std::string p = doc.at("process").get<std::string>();
    if (p != "jacobi" && p != "ou") fail(Errc::SchemaError, "process: expected 'jacobi' or 'ou'");
    sc.ou_process = p == "ou";
  }

  const json& arcs = require_field(doc, "arcs", "scenario");
  if (!arcs.is_array() || arcs.empty()) fail(Errc::SchemaError, "arcs: expected a non-empty array");
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const std::string path = "arcs[" + std::to_string(i) + "]";
    const json& a = arcs[i];
    ScenarioArc arc;
    arc.id = static_cast<int>(require_number(a, "id", path));
    arc.from = static_cast<NodeId>(require_number(a, "from", path));
    arc.to = static_cast<NodeId>(require_number(a, "to", path));
    arc.length = optional_number(a, "length", 1.0);
    arc.velocity = parse_coef(require_field(a, "velocity", path), path + ".velocity");
    arc.damping[0] = a.contains("damping1") ? parse_coef(a.at("damping1"), path + ".damping1")
                                            : CoefFn::constant(0.0);
    arc.damping[1] = a.contains("damping2") ? parse_coef(a.at("damping2"), path + ".damping2")
                                            : arc.damping[0];
    sc.arcs.push_back(std::move(arc));
  }

  const json& demands = require_field(doc, "demands", "scenario");
  if (!demands.is_array() || demands.empty())
    fail(Errc::SchemaError, "demands: expected a non-empty array");
  for (std::size_t i = 0; i < demands.size(); ++i) {
    const std::string path = "demands[" + std::to_string(i) + "]";
    const json& d = demands[i];
    ScenarioDemand dem;
    dem.node = static_cast<NodeId>(require_number(d, "node", path));
    dem.jacobi.kappa = require_number(d, "kappa", path);
    dem.jacobi.sigma = require_number(d, "sigma", path);
    dem.jacobi.d0 = require_number(d, "d0", path);
    dem.jacobi.theta = parse_coef(require_field(d, "theta", path), path + ".theta");
    if (d.contains("range")) {
      const auto range = d.at("range").get<std::vector<double>>();
      if (range.size() != 2) schema_fail(path + ".range", "expected [lo, hi]");
      dem.jacobi.lo = range[0];
      dem.jacobi.hi = range[1];
    }
    dem.ou_sigma = optional_number(d, "ou_sigma", -1.0);
    sc.demands.push_back(std::move(dem));
  }
  sc.validate();
  return sc;
}

}  // namespace

Network Scenario::make_network(int profile) const {
  if (profile != 1 && profile != 2) fail(Errc::SchemaError, "damping_profile must be 1 or 2");
  int max_node = 0;
  for (const ScenarioArc& a : arcs) max_node = std::max({max_node, a.from, a.to});
  std::vector<Arc> built(arcs.size());
  std::vector<char> present(arcs.size(), 0);
  for (const ScenarioArc& a : arcs) {
    if (a.id < 1 || a.id > static_cast<int>(arcs.size()))
      fail(Errc::SchemaError, "arc ids must be 1.." + std::to_string(arcs.size()));
    if (present[static_cast<std::size_t>(a.id - 1)])
      fail(Errc::SchemaError, "duplicate arc id " + std::to_string(a.id));
    present[static_cast<std::size_t>(a.id - 1)] = 1;
    built[static_cast<std::size_t>(a.id - 1)] =
        Arc{.tail = a.from, .head = a.to, .length = a.length, .velocity = a.velocity,
            .damping = a.damping[profile - 1]};
  }
  return Network(max_node + 1, std::move(built));
}

DemandModels Scenario::make_models(bool ou) const {
  const Network net = make_network(1);
  std::vector<DemandModels::Entry> entries;
  entries.reserve(net.demand_nodes().size());
  for (NodeId leaf : net.demand_nodes()) {
    const ScenarioDemand& d = demand_for(leaf);
    DemandModels::Entry e;
    e.jacobi = d.jacobi;
    if (ou) {
      if (d.ou_sigma < 0.0)
        fail(Errc::SchemaError,
             "demand node " + std::to_string(leaf) + " has no ou_sigma for the OU comparison");
      e.is_ou = true;
      e.ou.kappa = d.jacobi.kappa;
      e.ou.sigma = d.ou_sigma;
      e.ou.theta = d.jacobi.theta.affine(d.jacobi.lo, d.jacobi.hi - d.jacobi.lo);
      e.ou.z0 = d.jacobi.lo + (d.jacobi.hi - d.jacobi.lo) * d.jacobi.d0;
    }
    entries.push_back(std::move(e));
  }
  return DemandModels(std::move(entries));
}

UpdateSchedule Scenario::make_schedule() const {
  if (!update_times.empty()) {
    UpdateSchedule s;
    s.times.push_back(horizon.t0);
    for (double t : update_times)
      if (t > horizon.t0) s.times.push_back(t);
    s.check();
    return s;
  }
  return make_schedule(updates);
}

UpdateSchedule Scenario::make_schedule(int update_count) const {
  if (update_count <= 0) return UpdateSchedule::initial_only(horizon.t0);
  return UpdateSchedule::uniform(horizon.t0, horizon.T, update_count);
}

SampleGrid Scenario::sde_grid() const {
  SampleGrid g;
  g.t0 = horizon.t0;
  g.dt = dt_sde;
  g.n_steps = static_cast<int>(std::ceil((horizon.T - horizon.t0) / dt_sde - 1e-9));
  return g;
}

const ScenarioDemand& Scenario::demand_for(NodeId node) const {
  for (const ScenarioDemand& d : demands)
    if (d.node == node) return d;
  fail(Errc::SchemaError, "no demand parameters for node " + std::to_string(node));
}

void Scenario::validate() const {
  if (dx <= 0.0 || dt_sde <= 0.0) fail(Errc::SchemaError, "dx and dt_sde must be positive");
  if (n_runs < 1) fail(Errc::SchemaError, "n_runs must be >= 1");
  const Network net = make_network(1);
  net.validate(horizon);
  make_network(2).validate(horizon);
  for (const ScenarioDemand& d : demands) {
    if (d.node < 0 || d.node >= net.node_count())
      fail(Errc::SchemaError, "demand node " + std::to_string(d.node) + " does not exist");
    if (net.kind(d.node) != NodeKind::Demand)
      fail(Errc::SchemaError, "node " + std::to_string(d.node) + " is not a demand leaf");
    d.jacobi.check();
  }
  for (NodeId leaf : net.demand_nodes()) demand_for(leaf);  // every leaf parameterized
  if (ou_process)
    for (const ScenarioDemand& d : demands)
      if (d.ou_sigma < 0.0)
        fail(Errc::SchemaError, "process 'ou' requires ou_sigma on every demand node");
  make_schedule().check();
}

Scenario scenario_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::ParseError, e.what());
  }
  try {
    return parse(doc);
  } catch (const Error&) {
    throw;
  } catch (const json::exception& e) {
    fail(Errc::SchemaError, e.what());
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str());
}

}  // namespace flownet
