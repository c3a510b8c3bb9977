#include "flownet/netgraph.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "flownet/errors.hpp"

namespace flownet {

Network::Network(int node_count, std::vector<Arc> arcs) : arcs_(std::move(arcs)) {
  const auto n = static_cast<std::size_t>(node_count);
  kinds_.assign(n, NodeKind::Inner);
  in_arc_.assign(n, -1);
  out_arcs_.assign(n, {});
  demand_desc_.assign(n, {});

  for (std::size_t a = 0; a < arcs_.size(); ++a) {
    Arc& arc = arcs_[a];
    arc.id = static_cast<ArcId>(a);
    if (arc.tail < 0 || arc.head < 0 || arc.tail >= node_count || arc.head >= node_count)
      fail(Errc::SchemaError, "arc " + std::to_string(a + 1) + " references an unknown node");
    if (in_arc_[static_cast<std::size_t>(arc.head)] != -1)
      fail(Errc::MultipleIncoming, "node " + std::to_string(arc.head) + " has two incoming arcs");
    in_arc_[static_cast<std::size_t>(arc.head)] = arc.id;
    out_arcs_[static_cast<std::size_t>(arc.tail)].push_back(arc.id);
  }

  for (NodeId v = 0; v < node_count; ++v) {
    const bool has_in = in_arc_[static_cast<std::size_t>(v)] != -1;
    const bool has_out = !out_arcs_[static_cast<std::size_t>(v)].empty();
    if (!has_in)
      kinds_[static_cast<std::size_t>(v)] = NodeKind::Source;
    else
      kinds_[static_cast<std::size_t>(v)] = has_out ? NodeKind::Inner : NodeKind::Demand;
    if (kinds_[static_cast<std::size_t>(v)] == NodeKind::Demand) demand_nodes_.push_back(v);
  }

  // Demand descendants, bottom-up over the arc ordering (head of arc a is
  // a+1 under the indexing convention, but compute generically).
  std::vector<int> order(n);
  // reverse BFS from node 0 if it is a source; fall back to repeated passes
  std::deque<NodeId> queue;
  if (node_count > 0) queue.push_back(0);
  std::vector<NodeId> bfs;
  std::vector<char> seen(n, 0);
  if (node_count > 0) seen[0] = 1;
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    bfs.push_back(v);
    for (ArcId a : out_arcs_[static_cast<std::size_t>(v)]) {
      NodeId w = arcs_[static_cast<std::size_t>(a)].head;
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        queue.push_back(w);
      }
    }
  }
  for (auto it = bfs.rbegin(); it != bfs.rend(); ++it) {
    NodeId v = *it;
    auto& dd = demand_desc_[static_cast<std::size_t>(v)];
    if (kinds_[static_cast<std::size_t>(v)] == NodeKind::Demand) {
      dd = {v};
      continue;
    }
    for (ArcId a : out_arcs_[static_cast<std::size_t>(v)]) {
      const auto& child = demand_desc_[static_cast<std::size_t>(arcs_[static_cast<std::size_t>(a)].head)];
      dd.insert(dd.end(), child.begin(), child.end());
    }
    std::sort(dd.begin(), dd.end());
  }
  for (NodeId v : bfs) {
    if (v != 0) topo_arcs_.push_back(in_arc_[static_cast<std::size_t>(v)]);
  }
}

void Network::validate(const Horizon& h) const {
  const int n = node_count();
  if (n == 0 || arc_count() == 0) fail(Errc::SchemaError, "empty network");
  if (arc_count() != n - 1)
    fail(Errc::CycleDetected, "a tree on " + std::to_string(n) + " nodes needs " +
                                  std::to_string(n - 1) + " arcs, got " + std::to_string(arc_count()));

  int sources = 0;
  for (NodeId v = 0; v < n; ++v)
    if (kind(v) == NodeKind::Source) ++sources;
  if (sources != 1) fail(Errc::MultipleSources, std::to_string(sources) + " source nodes");
  if (kind(0) != NodeKind::Source)
    fail(Errc::IndexingConvention, "node 0 must be the source");
  if (outgoing_arcs(0).size() != 1)
    fail(Errc::IndexingConvention, "the source must have a single outgoing arc");

  // reachability from the source; an unreached node with an incoming arc
  // sits on a cycle (every non-source node has exactly one incoming arc)
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<NodeId> queue{0};
  seen[0] = 1;
  while (!queue.empty()) {
    NodeId v = queue.front();
    queue.pop_front();
    for (ArcId a : outgoing_arcs(v)) {
      NodeId w = arc(a).head;
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        queue.push_back(w);
      }
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    if (seen[static_cast<std::size_t>(v)]) continue;
    if (in_arc_[static_cast<std::size_t>(v)] != -1)
      fail(Errc::CycleDetected, "node " + std::to_string(v) + " is unreachable from the source");
    fail(Errc::DisconnectedNode, "node " + std::to_string(v) + " is disconnected");
  }

  for (const Arc& a : arcs_) {
    if (a.head != a.id + 1)
      fail(Errc::IndexingConvention,
           "arc " + std::to_string(a.id + 1) + " must terminate at node " + std::to_string(a.id + 1));
    if (a.length <= 0.0)
      fail(Errc::SchemaError, "arc " + std::to_string(a.id + 1) + " has non-positive length");
    if (a.velocity.min_value() <= 0.0)
      fail(Errc::NonPositiveVelocity,
           "arc " + std::to_string(a.id + 1) + " velocity is not strictly positive on [t0,T]");
    if (a.damping.min_value() < 0.0)
      fail(Errc::NegativeDamping, "arc " + std::to_string(a.id + 1) + " damping is negative");
  }
  if (h.T <= h.t0) fail(Errc::SchemaError, "horizon must satisfy T > t0");
}

NodeId Network::predecessor_node(NodeId v) const {
  ArcId a = incoming_arc(v);
  return arc(a).tail;
}

ArcId Network::incoming_arc(NodeId v) const {
  ArcId a = in_arc_[static_cast<std::size_t>(v)];
  if (a == -1) fail(Errc::NoSuchPath, "node " + std::to_string(v) + " has no incoming arc");
  return a;
}

ArcId Network::preceding_arc(ArcId a) const { return incoming_arc(arc(a).tail); }

std::vector<ArcId> Network::path_arcs(NodeId v_from, NodeId v_to) const {
  std::vector<ArcId> rev;
  NodeId v = v_to;
  while (v != v_from) {
    if (in_arc_[static_cast<std::size_t>(v)] == -1)
      fail(Errc::NoSuchPath, "no path from node " + std::to_string(v_from) + " to node " +
                                 std::to_string(v_to));
    ArcId a = in_arc_[static_cast<std::size_t>(v)];
    rev.push_back(a);
    v = arc(a).tail;
  }
  std::reverse(rev.begin(), rev.end());
  return rev;
}

int Network::leaf_slot(NodeId v) const {
  auto it = std::lower_bound(demand_nodes_.begin(), demand_nodes_.end(), v);
  if (it == demand_nodes_.end() || *it != v)
    fail(Errc::NoSuchPath, "node " + std::to_string(v) + " is not a demand node");
  return static_cast<int>(it - demand_nodes_.begin());
}

Network make_chain_network(int n_arcs, const CoefFn& velocity, const CoefFn& damping) {
  std::vector<Arc> arcs;
  for (int i = 0; i < n_arcs; ++i)
    arcs.push_back(Arc{.tail = i, .head = i + 1, .length = 1.0, .velocity = velocity, .damping = damping});
  return Network(n_arcs + 1, std::move(arcs));
}

Network make_fork_network(const CoefFn& v1, const CoefFn& v2, const CoefFn& v3, const CoefFn& mu1,
                          const CoefFn& mu2, const CoefFn& mu3) {
  std::vector<Arc> arcs;
  arcs.push_back(Arc{.tail = 0, .head = 1, .length = 1.0, .velocity = v1, .damping = mu1});
  arcs.push_back(Arc{.tail = 1, .head = 2, .length = 1.0, .velocity = v2, .damping = mu2});
  arcs.push_back(Arc{.tail = 1, .head = 3, .length = 1.0, .velocity = v3, .damping = mu3});
  return Network(4, std::move(arcs));
}

}  // namespace flownet
