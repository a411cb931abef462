#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace rpltrail {

using NodeId = int32_t;
constexpr NodeId kNoNode = -1;

// Undirected radio topology with dense ids 0..n-1. Neighbor lists stay
// sorted so that iteration order never depends on insertion order.
struct Topology {
  int32_t n = 0;
  std::vector<std::vector<NodeId>> adj;

  bool linked(NodeId a, NodeId b) const;
  void add_link(NodeId a, NodeId b);
  void remove_link(NodeId a, NodeId b);

  static Topology make(int32_t n,
                       const std::vector<std::pair<NodeId, NodeId>>& links);

  // Balanced k-ary tree of height h in level order: root 0, children of i
  // are k*i+1 .. k*i+k. Holds (k^(h+1)-1)/(k-1) nodes.
  static Topology kary_tree(uint32_t k, uint32_t h);

  static Topology line(int32_t n);

  // Random unit-square disk graph: n points, link when closer than radius.
  // Coordinates come from a dedicated generator so the same (n, radius,
  // seed) triple always yields the same graph.
  static Topology disk(int32_t n, double radius, uint64_t seed);
};

}  // namespace rpltrail
