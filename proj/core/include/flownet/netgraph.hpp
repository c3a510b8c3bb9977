#ifndef FLOWNET_NETGRAPH_HPP
#define FLOWNET_NETGRAPH_HPP

#include <vector>

#include "flownet/coef.hpp"

namespace flownet {

// Dense 0-based identifiers. The indexing follows the convention that arc a
// terminates at node a+1 (node 0 is the single source), so the arc labelled
// i in scenario files (1-based) is stored at index i-1.
using NodeId = int;
using ArcId = int;

enum class NodeKind { Source, Inner, Demand };

struct Arc {
  ArcId id = -1;
  NodeId tail = -1;
  NodeId head = -1;
  double length = 1.0;
  CoefFn velocity;
  CoefFn damping;
};

struct Horizon {
  double t0 = 0.0;
  double T = 2.5;
};

/// Directed tree with one source, inner nodes, and demand leaves.
/// Immutable after construction; all topology queries are cached.
class Network {
public:
  Network(int node_count, std::vector<Arc> arcs);

  /// Checks the tree invariants and the coefficient sign conditions on
  /// [t0, T]; throws Error on the first violation.
  void validate(const Horizon& h) const;

  int node_count() const { return static_cast<int>(kinds_.size()); }
  int arc_count() const { return static_cast<int>(arcs_.size()); }
  const Arc& arc(ArcId a) const { return arcs_[static_cast<std::size_t>(a)]; }
  const std::vector<Arc>& arcs() const { return arcs_; }

  NodeKind kind(NodeId v) const { return kinds_[static_cast<std::size_t>(v)]; }
  NodeId source() const { return 0; }

  /// p~: direct predecessor node (error at the source).
  NodeId predecessor_node(NodeId v) const;
  /// Arc ending at v (error at the source).
  ArcId incoming_arc(NodeId v) const;
  /// q~: arc directly preceding arc a (error when a leaves the source).
  ArcId preceding_arc(ArcId a) const;
  /// J^out.
  const std::vector<ArcId>& outgoing_arcs(NodeId v) const {
    return out_arcs_[static_cast<std::size_t>(v)];
  }
  /// c~: demand nodes in the subtree rooted at v; a demand leaf maps to itself.
  const std::vector<NodeId>& demand_descendants(NodeId v) const {
    return demand_desc_[static_cast<std::size_t>(v)];
  }
  /// eta: ordered arc sequence from v_from down to v_to (NoSuchPath if v_to
  /// is not in the subtree of v_from).
  std::vector<ArcId> path_arcs(NodeId v_from, NodeId v_to) const;

  /// All demand leaves, ascending.
  const std::vector<NodeId>& demand_nodes() const { return demand_nodes_; }
  /// Position of leaf v in demand_nodes() (error if v is not a leaf).
  int leaf_slot(NodeId v) const;

  /// Arcs in topological order from the source.
  const std::vector<ArcId>& topo_arcs() const { return topo_arcs_; }

private:
  std::vector<Arc> arcs_;
  std::vector<NodeKind> kinds_;
  std::vector<ArcId> in_arc_;                    // -1 at source / unset
  std::vector<std::vector<ArcId>> out_arcs_;
  std::vector<std::vector<NodeId>> demand_desc_;
  std::vector<NodeId> demand_nodes_;
  std::vector<ArcId> topo_arcs_;
};

/// Convenience builders for the two reference layouts: a chain
/// v0 -> v1 -> ... (one demand node) and the 1-2 fork (two demand nodes).
Network make_chain_network(int n_arcs, const CoefFn& velocity, const CoefFn& damping);
Network make_fork_network(const CoefFn& v1, const CoefFn& v2, const CoefFn& v3, const CoefFn& mu1,
                          const CoefFn& mu2, const CoefFn& mu3);

}  // namespace flownet

#endif
