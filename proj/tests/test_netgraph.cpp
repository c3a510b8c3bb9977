#include <algorithm>

#include "doctest.h"
#include "flownet/errors.hpp"
#include "flownet/netgraph.hpp"
#include "test_support.hpp"

using namespace flownet;

namespace {

Network fork_net() {
  const CoefFn v = CoefFn::constant(14.0);
  const CoefFn mu = CoefFn::constant(0.0);
  return make_fork_network(v, v, v, mu, mu, mu);
}

// random tree obeying the arc-i-terminates-at-v_{i+1} convention and the
// single source arc
Network random_tree(testsupport::PropRng& rng, int n_arcs) {
  std::vector<Arc> arcs;
  for (int a = 0; a < n_arcs; ++a)
    arcs.push_back(Arc{.tail = a == 0 ? 0 : rng.uniform_int(1, a),
                       .head = a + 1,
                       .length = 1.0,
                       .velocity = CoefFn::constant(rng.uniform(5.0, 15.0)),
                       .damping = CoefFn::constant(rng.uniform(0.0, 0.5))});
  return Network(n_arcs + 1, std::move(arcs));
}

}  // namespace

TEST_CASE("validate accepts the 1-1 chain") {
  const Network net = make_chain_network(2, CoefFn::constant(14.0), CoefFn::constant(0.0));
  CHECK_NOTHROW(net.validate(Horizon{0.0, 2.5}));
  CHECK(net.kind(0) == NodeKind::Source);
  CHECK(net.kind(1) == NodeKind::Inner);
  CHECK(net.kind(2) == NodeKind::Demand);
}

TEST_CASE("validate rejects a velocity that is not strictly positive") {
  // lambda(t) = 1 + sin(t) touches zero
  const Network net =
      make_chain_network(2, CoefFn::sinusoid(1.0, 1.0, 1.0, 0.0), CoefFn::constant(0.0));
  CHECK_THROWS_WITH_AS(net.validate(Horizon{0.0, 2.5}), doctest::Contains("NonPositiveVelocity"),
                       Error);
}

TEST_CASE("two arcs into one node are rejected") {
  std::vector<Arc> arcs;
  arcs.push_back(Arc{.tail = 0, .head = 1, .velocity = CoefFn::constant(1.0), .damping = CoefFn::constant(0.0)});
  arcs.push_back(Arc{.tail = 0, .head = 1, .velocity = CoefFn::constant(1.0), .damping = CoefFn::constant(0.0)});
  CHECK_THROWS_AS(Network(2, std::move(arcs)), Error);
}

TEST_CASE("a ring detached from the source is a cycle") {
  // arcs: 0->1 ok, then 3->2 and 2->3 form a 2-cycle (ids respect the
  // head-numbering convention)
  std::vector<Arc> arcs;
  arcs.push_back(Arc{.tail = 0, .head = 1, .velocity = CoefFn::constant(1.0), .damping = CoefFn::constant(0.0)});
  arcs.push_back(Arc{.tail = 3, .head = 2, .velocity = CoefFn::constant(1.0), .damping = CoefFn::constant(0.0)});
  arcs.push_back(Arc{.tail = 2, .head = 3, .velocity = CoefFn::constant(1.0), .damping = CoefFn::constant(0.0)});
  const Network net(4, std::move(arcs));
  CHECK_THROWS_WITH_AS(net.validate(Horizon{0.0, 1.0}), doctest::Contains("CycleDetected"), Error);
}

TEST_CASE("an isolated node means more than one source") {
  std::vector<Arc> arcs;
  arcs.push_back(Arc{.tail = 0, .head = 1, .velocity = CoefFn::constant(1.0), .damping = CoefFn::constant(0.0)});
  arcs.push_back(Arc{.tail = 1, .head = 2, .velocity = CoefFn::constant(1.0), .damping = CoefFn::constant(0.0)});
  const Network net(4, std::move(arcs));  // node 3 dangles with no arcs
  CHECK_THROWS_AS(net.validate(Horizon{0.0, 1.0}), Error);
}

TEST_CASE("the source carries exactly one outgoing arc") {
  std::vector<Arc> arcs;
  arcs.push_back(Arc{.tail = 0, .head = 1, .velocity = CoefFn::constant(1.0), .damping = CoefFn::constant(0.0)});
  arcs.push_back(Arc{.tail = 0, .head = 2, .velocity = CoefFn::constant(1.0), .damping = CoefFn::constant(0.0)});
  const Network net(3, std::move(arcs));
  CHECK_THROWS_WITH_AS(net.validate(Horizon{0.0, 1.0}), doctest::Contains("single outgoing"),
                       Error);
}

TEST_CASE("topology queries on the 1-2 network") {
  const Network net = fork_net();
  CHECK(net.demand_descendants(1) == std::vector<NodeId>{2, 3});
  CHECK(net.demand_descendants(2) == std::vector<NodeId>{2});  // leaf maps to itself
  CHECK(net.path_arcs(1, 3) == std::vector<ArcId>{2});         // arc 3 has index 2
  CHECK(net.path_arcs(0, 3) == std::vector<ArcId>{0, 2});
  CHECK(net.predecessor_node(3) == 1);
  CHECK(net.preceding_arc(2) == 0);
  CHECK(net.outgoing_arcs(1) == std::vector<ArcId>{1, 2});
  CHECK(net.leaf_slot(3) == 1);
  CHECK_THROWS_WITH_AS(net.path_arcs(2, 3), doctest::Contains("NoSuchPath"), Error);
}

TEST_CASE("demand descendants are the disjoint union over children") {
  testsupport::PropRng rng(81);
  for (int trial = 0; trial < 50; ++trial) {
    const Network net = random_tree(rng, rng.uniform_int(2, 12));
    net.validate(Horizon{0.0, 1.0});
    for (NodeId v = 0; v < net.node_count(); ++v) {
      if (net.kind(v) == NodeKind::Demand) continue;
      std::vector<NodeId> merged;
      for (ArcId a : net.outgoing_arcs(v)) {
        const auto& child = net.demand_descendants(net.arc(a).head);
        merged.insert(merged.end(), child.begin(), child.end());
      }
      std::sort(merged.begin(), merged.end());
      CHECK(merged == net.demand_descendants(v));
      CHECK(std::adjacent_find(merged.begin(), merged.end()) == merged.end());  // disjoint
    }
  }
}

TEST_CASE("paths from inner nodes are suffixes of the source path") {
  testsupport::PropRng rng(82);
  for (int trial = 0; trial < 50; ++trial) {
    const Network net = random_tree(rng, rng.uniform_int(2, 12));
    for (NodeId v = 1; v < net.node_count(); ++v)
      for (NodeId d : net.demand_descendants(v)) {
        const auto full = net.path_arcs(0, d);
        const auto sub = net.path_arcs(v, d);
        REQUIRE(sub.size() <= full.size());
        CHECK(std::equal(sub.rbegin(), sub.rend(), full.rbegin()));
      }
  }
}
