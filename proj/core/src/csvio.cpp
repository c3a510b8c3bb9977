#include "flownet/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "flownet/errors.hpp"

namespace flownet {

namespace {

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::IoError, "cannot write '" + path + "'");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot read '" + path + "'");
  return in;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::vector<NodeId>& leaf_nodes) {
  std::ofstream out = open_out(path);
  out << "t,u";
  for (NodeId v : leaf_nodes) out << ",supply_v" << v << ",demand_v" << v;
  out << "\n";
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    out << fmt17(traj.times[j]) << ',' << fmt17(traj.control[j]);
    for (std::size_t s = 0; s < leaf_nodes.size(); ++s)
      out << ',' << fmt17(traj.supply[s][j]) << ',' << fmt17(traj.demand[s][j]);
    out << "\n";
  }
  if (!out) fail(Errc::IoError, "write failed for '" + path + "'");
}

Trajectory read_trajectory_csv(const std::string& path, std::vector<NodeId>* leaf_nodes) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) fail(Errc::ParseError, "empty trajectory file '" + path + "'");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "t" || header[1] != "u" || (header.size() - 2) % 2 != 0)
    fail(Errc::ParseError, "unexpected trajectory header in '" + path + "'");
  const std::size_t n_leaves = (header.size() - 2) / 2;
  if (leaf_nodes) {
    leaf_nodes->clear();
    for (std::size_t s = 0; s < n_leaves; ++s) {
      const std::string& col = header[2 + 2 * s];
      leaf_nodes->push_back(static_cast<NodeId>(std::stoi(col.substr(col.find('v') + 1))));
    }
  }
  Trajectory traj;
  traj.supply.resize(n_leaves);
  traj.demand.resize(n_leaves);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      fail(Errc::ParseError, "ragged row in '" + path + "'");
    traj.times.push_back(std::stod(fields[0]));
    traj.control.push_back(std::stod(fields[1]));
    for (std::size_t s = 0; s < n_leaves; ++s) {
      traj.supply[s].push_back(std::stod(fields[2 + 2 * s]));
      traj.demand[s].push_back(std::stod(fields[3 + 2 * s]));
    }
  }
  return traj;
}

void write_report_csv(const std::string& path, const ErrorReport& report) {
  std::ofstream out = open_out(path);
  out << "setting,leaf,damping_profile,norm_rmse,n_runs,seed\n";
  for (const ErrorReportRow& r : report.rows)
    out << setting_name(r.setting) << ",v" << r.leaf << ',' << r.damping_profile << ','
        << fmt17(r.norm_rmse) << ',' << r.n_runs << ',' << r.seed << "\n";
  if (!out) fail(Errc::IoError, "write failed for '" + path + "'");
}

ErrorReport read_report_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) fail(Errc::ParseError, "empty report file '" + path + "'");
  ErrorReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) fail(Errc::ParseError, "ragged row in '" + path + "'");
    ErrorReportRow row;
    row.setting = setting_from_name(f[0]);
    row.leaf = static_cast<NodeId>(std::stoi(f[1].substr(1)));
    row.damping_profile = std::stoi(f[2]);
    row.norm_rmse = std::stod(f[3]);
    row.n_runs = std::stoi(f[4]);
    row.seed = std::stoull(f[5]);
    report.rows.push_back(row);
  }
  return report;
}

void write_reduction_csv(const std::string& path, const ReductionStudy& study) {
  std::ofstream out = open_out(path);
  out << "setting,leaf,updates,norm_rmse,reduction_pct\n";
  for (std::size_t s = 0; s < study.leaves.size(); ++s)
    out << "MS1,v" << study.leaves[s] << ",0," << fmt17(study.baseline_rmse[s]) << ",0\n";
  for (std::size_t m = 0; m < 2; ++m)
    for (std::size_t c = 0; c < study.update_counts.size(); ++c)
      for (std::size_t s = 0; s < study.leaves.size(); ++s)
        out << (m == 0 ? "MS2" : "MS3") << ",v" << study.leaves[s] << ','
            << study.update_counts[c] << ',' << fmt17(study.rmse[m][c][s]) << ','
            << fmt17(study.reduction_pct[m][c][s]) << "\n";
  if (!out) fail(Errc::IoError, "write failed for '" + path + "'");
}

}  // namespace flownet
