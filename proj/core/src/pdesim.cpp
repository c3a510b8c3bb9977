#include "flownet/pdesim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flownet/errors.hpp"

namespace flownet {

namespace {

double sample_path_linear(const std::vector<double>& path, const SampleGrid& grid, double t) {
  const double x = (t - grid.t0) / grid.dt;
  if (x <= 0.0) return path.front();
  const auto last = static_cast<double>(path.size() - 1);
  if (x >= last) return path.back();
  const auto k = static_cast<std::size_t>(x);
  const double w = x - static_cast<double>(k);
  return path[k] * (1.0 - w) + path[k + 1] * w;
}

}  // namespace

double StepSeries::interp(double t) const {
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto k = static_cast<std::size_t>(it - times.begin()) - 1;
  const double w = (t - times[k]) / (times[k + 1] - times[k]);
  return values[k] * (1.0 - w) + values[k + 1] * w;
}

double StepSeries::step_at(double t) const {
  if (t <= times.front()) return values.front();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto k = std::min(static_cast<std::size_t>(it - times.begin()) - 1, values.size() - 1);
  return values[k];
}

double UniformSeries::interp(double t) const {
  const double x = (t - t0) / dt;
  if (x <= 0.0) return values.front();
  const auto last = static_cast<double>(values.size() - 1);
  if (x >= last) return values.back();
  const auto k = static_cast<std::size_t>(x);
  const double w = x - static_cast<double>(k);
  return values[k] * (1.0 - w) + values[k + 1] * w;
}

void shift_cells(std::span<double> cells, double boundary_density) {
  std::copy_backward(cells.begin(), cells.end() - 1, cells.end());
  cells.front() = boundary_density;
}

void scale_cells(std::span<double> cells, double factor) {
  for (double& z : cells) z *= factor;
}

void step_arc(std::span<double> cells, double boundary_density, double dt, double mu) {
  const double factor = 1.0 - dt * mu;
  if (factor < 0.0)
    fail(Errc::NegativeDampingFactor, "time step too coarse for damping magnitude dt*mu = " +
                                          std::to_string(dt * mu));
  shift_cells(cells, boundary_density);
  scale_cells(cells, factor);
}

double node_influx(const StepSeries& end_flux, double t_common) { return end_flux.interp(t_common); }

double node_outflux_boundary(double alpha, const UniformSeries& flux_over_lambda, double t_arc) {
  return alpha * flux_over_lambda.interp(t_arc);
}

SimulationEngine::SimulationEngine(const Network& net, Horizon horizon, GridSpec spec)
    : net_(&net), horizon_(horizon), spec_(spec), tmap_(net, horizon) {
  double lambda_max = 0.0;
  for (const Arc& a : net.arcs()) lambda_max = std::max(lambda_max, a.velocity.max_value());
  dt_common_ = spec.dt_common > 0.0 ? spec.dt_common : spec.dx / lambda_max;
  n_common_T_ = static_cast<int>(std::floor((horizon.T - horizon.t0) / dt_common_ + 1e-9));
  n_common_pad_ = n_common_T_ + 6;
  const double t_end_pad = horizon.t0 + static_cast<double>(n_common_pad_) * dt_common_;

  arcs_.resize(static_cast<std::size_t>(net.arc_count()));
  for (const Arc& arc : net.arcs()) {
    ArcTables& tab = arcs_[static_cast<std::size_t>(arc.id)];
    const double cells = arc.length / spec.dx;
    tab.n_cells = static_cast<int>(std::lround(cells));
    if (tab.n_cells < 1 || std::abs(cells - static_cast<double>(tab.n_cells)) > 1e-9)
      fail(Errc::SchemaError, "dx must divide the length of arc " + std::to_string(arc.id + 1));

    double t = horizon.t0;
    tab.times.push_back(t);
    tab.lambda.push_back(arc.velocity(t));
    while (t < t_end_pad + dt_common_) {
      const double lam = tab.lambda.back();
      const double dt = spec.dx / lam;
      const double mu = arc.damping(t);
      const double factor = spec.exact_damping ? std::exp(-arc.damping.integral(t, t + dt))
                                               : 1.0 - dt * mu;
      if (factor < 0.0)
        fail(Errc::NegativeDampingFactor,
             "time step too coarse for damping on arc " + std::to_string(arc.id + 1));
      tab.damp.push_back(factor);
      t += dt;
      tab.times.push_back(t);
      tab.lambda.push_back(arc.velocity(t));
    }

    const auto n_steps = tab.damp.size();
    if (arc.tail == net.source()) {
      inflow_terms_.resize(n_steps);
      for (std::size_t j = 0; j < n_steps; ++j) {
        auto& terms = inflow_terms_[j];
        terms.resize(net.demand_nodes().size());
        for (std::size_t s = 0; s < net.demand_nodes().size(); ++s) {
          const NodeId leaf = net.demand_nodes()[s];
          LeafTerm& lt = terms[s];
          lt.arrival = tmap_.node_arrival(net.source(), leaf, tab.times[j]);
          lt.gamma = tmap_.gamma(net.source(), leaf, tab.times[j]);
          lt.within_horizon = lt.arrival <= horizon.T + TransitMap::kRootTol;
        }
      }
    } else {
      tab.node_terms.resize(n_steps);
      tab.info_base.resize(n_steps);
      const auto& leaves = net.demand_descendants(arc.tail);
      for (std::size_t j = 0; j < n_steps; ++j) {
        const double tj = tab.times[j];
        auto& terms = tab.node_terms[j];
        terms.resize(leaves.size());
        for (std::size_t r = 0; r < leaves.size(); ++r) {
          terms[r].arrival = tmap_.node_arrival(arc.tail, leaves[r], tj);
          terms[r].gamma = tmap_.gamma(arc.tail, leaves[r], tj);
          terms[r].within_horizon = terms[r].arrival <= horizon.T + TransitMap::kRootTol;
        }
        tab.info_base[j] = std::max(horizon.t0, tmap_.injection_time(net.source(), arc.tail, tj));
      }
      const auto& out = net.outgoing_arcs(arc.tail);
      tab.out_pos = static_cast<std::size_t>(
          std::find(out.begin(), out.end(), arc.id) - out.begin());
      tab.leaf_idx.resize(out.size());
      for (std::size_t ki = 0; ki < out.size(); ++ki)
        for (NodeId leaf : net.demand_descendants(net.arc(out[ki]).head))
          tab.leaf_idx[ki].push_back(static_cast<int>(
              std::lower_bound(leaves.begin(), leaves.end(), leaf) - leaves.begin()));
    }
  }

  first_arrival_.reserve(net.demand_nodes().size());
  for (NodeId leaf : net.demand_nodes())
    first_arrival_.push_back(tmap_.node_arrival(net.source(), leaf, horizon.t0));
}

double SimulationEngine::eval_inflow(const DemandModels& models, const ControlPolicy& policy,
                                     const ObservationSet& obs, int step) const {
  const double t_in = arcs_[static_cast<std::size_t>(net_->outgoing_arcs(net_->source()).front())]
                          .times[static_cast<std::size_t>(step)];
  const int info_idx = policy.injection_info_index(t_in);
  const double t_hat = policy.schedule.times[static_cast<std::size_t>(info_idx)];
  const auto& terms = inflow_terms_[static_cast<std::size_t>(step)];
  double u = 0.0;
  for (std::size_t s = 0; s < terms.size(); ++s) {
    if (!terms[s].within_horizon) continue;
    const double observed = obs.values[s][static_cast<std::size_t>(info_idx)];
    u += terms[s].gamma *
         models.conditional_mean(static_cast<int>(s), t_hat, observed, terms[s].arrival);
  }
  return u;
}

std::vector<double> SimulationEngine::eval_alpha(const DemandModels& models,
                                                 const ControlPolicy& policy,
                                                 const ObservationSet& obs, ArcId arc, int step,
                                                 double f_in) const {
  const ArcTables& tab = arcs_[static_cast<std::size_t>(arc)];
  const NodeId v = net_->arc(arc).tail;
  const auto& leaves = net_->demand_descendants(v);
  const auto& terms = tab.node_terms[static_cast<std::size_t>(step)];
  const double t = tab.times[static_cast<std::size_t>(step)];

  int info_idx = 0;
  if (policy.setting == ModelSetting::MS2)
    info_idx = policy.schedule.floor_index(tab.info_base[static_cast<std::size_t>(step)]);
  else if (policy.setting == ModelSetting::MS3)
    info_idx = policy.schedule.floor_index(t);
  const double t_hat = policy.schedule.times[static_cast<std::size_t>(info_idx)];

  std::vector<LeafShare> shares(leaves.size());
  for (std::size_t r = 0; r < leaves.size(); ++r) {
    const int slot = net_->leaf_slot(leaves[r]);
    const double observed = obs.values[static_cast<std::size_t>(slot)][static_cast<std::size_t>(info_idx)];
    shares[r].gamma = terms[r].gamma;
    shares[r].within_horizon = terms[r].within_horizon;
    shares[r].expected = models.conditional_mean(slot, t_hat, observed, terms[r].arrival);
  }

  if (policy.setting == ModelSetting::MS3) return ms3_from_shares(shares, tab.leaf_idx, f_in).alpha;

  std::vector<std::vector<LeafShare>> per_arc(tab.leaf_idx.size());
  for (std::size_t ki = 0; ki < tab.leaf_idx.size(); ++ki)
    for (int r : tab.leaf_idx[ki]) per_arc[ki].push_back(shares[static_cast<std::size_t>(r)]);
  return alpha_from_shares(per_arc);
}

Trajectory SimulationEngine::run(const DemandModels& models, const ControlPolicy& policy,
                                 const ObservationSet& obs,
                                 const std::vector<std::vector<double>>& demand_paths,
                                 const SampleGrid& sde_grid,
                                 const std::function<double(double)>* control_override,
                                 CouplingRecord* coupling) const {
  const Network& net = *net_;
  const int n_nodes = net.node_count();
  std::vector<UniformSeries> node_flux(static_cast<std::size_t>(n_nodes));
  if (coupling) coupling->arc_inflow.resize(static_cast<std::size_t>(net.arc_count()));

  StepSeries u_series;
  std::vector<double> cells;
  std::vector<double> ratio;  // f_in / lambda_m on the common grid

  for (ArcId a : net.topo_arcs()) {
    const Arc& arc = net.arc(a);
    const ArcTables& tab = arcs_[static_cast<std::size_t>(a)];
    const auto n_steps = tab.damp.size();
    cells.assign(static_cast<std::size_t>(tab.n_cells), 0.0);

    StepSeries end_flux;
    end_flux.times = tab.times;
    end_flux.values.assign(tab.times.size(), 0.0);

    const bool from_source = arc.tail == net.source();
    if (from_source) {
      u_series.times.assign(tab.times.begin(), tab.times.end() - 1);
      u_series.values.resize(n_steps);
    } else {
      const UniformSeries& fin = node_flux[static_cast<std::size_t>(arc.tail)];
      ratio.resize(fin.values.size());
      for (std::size_t k = 0; k < fin.values.size(); ++k)
        ratio[k] = fin.values[k] / arc.velocity(fin.time(static_cast<int>(k)));
    }
    UniformSeries ratio_series;
    if (!from_source) {
      ratio_series.t0 = horizon_.t0;
      ratio_series.dt = dt_common_;
      ratio_series.values = ratio;
    }

    StepSeries* inflow_rec = nullptr;
    if (coupling) {
      inflow_rec = &coupling->arc_inflow[static_cast<std::size_t>(a)];
      inflow_rec->times.assign(tab.times.begin(), tab.times.end() - 1);
      inflow_rec->values.resize(n_steps);
    }
    for (std::size_t j = 0; j < n_steps; ++j) {
      double boundary;
      if (from_source) {
        const double u = control_override ? (*control_override)(tab.times[j])
                                          : eval_inflow(models, policy, obs, static_cast<int>(j));
        u_series.values[j] = u;
        boundary = u / tab.lambda[j];
      } else {
        const double t_j = tab.times[j];
        const double f_in = node_flux[static_cast<std::size_t>(arc.tail)].interp(t_j);
        const std::vector<double> alphas =
            eval_alpha(models, policy, obs, a, static_cast<int>(j), f_in);
        boundary = node_outflux_boundary(alphas[tab.out_pos], ratio_series, t_j);
      }
      if (inflow_rec) inflow_rec->values[j] = boundary * tab.lambda[j];
      shift_cells(cells, boundary);
      scale_cells(cells, tab.damp[j]);
      end_flux.values[j + 1] = cells.back() * tab.lambda[j + 1];
    }

    UniformSeries& head_flux = node_flux[static_cast<std::size_t>(arc.head)];
    head_flux.t0 = horizon_.t0;
    head_flux.dt = dt_common_;
    head_flux.values.resize(static_cast<std::size_t>(n_common_pad_) + 1);
    for (int k = 0; k <= n_common_pad_; ++k)
      head_flux.values[static_cast<std::size_t>(k)] =
          node_influx(end_flux, horizon_.t0 + static_cast<double>(k) * dt_common_);
  }
  if (coupling) coupling->node_influx = node_flux;

  Trajectory out;
  const auto n_samples = static_cast<std::size_t>(n_common_T_) + 1;
  out.times.resize(n_samples);
  for (std::size_t j = 0; j < n_samples; ++j) out.times[j] = sample_time(static_cast<int>(j));
  out.control.resize(n_samples);
  for (std::size_t j = 0; j < n_samples; ++j) out.control[j] = u_series.step_at(out.times[j]);

  const auto n_leaves = net.demand_nodes().size();
  out.supply.resize(n_leaves);
  out.demand.resize(n_leaves);
  out.window_start = first_arrival_;
  for (std::size_t s = 0; s < n_leaves; ++s) {
    const NodeId leaf = net.demand_nodes()[s];
    const auto& flux = node_flux[static_cast<std::size_t>(leaf)].values;
    out.supply[s].assign(flux.begin(), flux.begin() + static_cast<std::ptrdiff_t>(n_samples));
    out.demand[s].assign(n_samples, 0.0);
    if (s < demand_paths.size() && !demand_paths[s].empty())
      for (std::size_t j = 0; j < n_samples; ++j)
        out.demand[s][j] = sample_path_linear(demand_paths[s], sde_grid, out.times[j]);
  }
  return out;
}

}  // namespace flownet
