#include "rpltrail/graph.hpp"

#include <algorithm>
#include <cassert>
#include <random>

namespace rpltrail {

bool Topology::linked(NodeId a, NodeId b) const {
  const auto& v = adj[a];
  return std::binary_search(v.begin(), v.end(), b);
}

void Topology::add_link(NodeId a, NodeId b) {
  assert(a != b && a >= 0 && b >= 0 && a < n && b < n);
  if (linked(a, b)) return;
  adj[a].insert(std::lower_bound(adj[a].begin(), adj[a].end(), b), b);
  adj[b].insert(std::lower_bound(adj[b].begin(), adj[b].end(), a), a);
}

void Topology::remove_link(NodeId a, NodeId b) {
  auto drop = [this](NodeId x, NodeId y) {
    auto& v = adj[x];
    auto it = std::lower_bound(v.begin(), v.end(), y);
    if (it != v.end() && *it == y) v.erase(it);
  };
  drop(a, b);
  drop(b, a);
}

Topology Topology::make(int32_t n,
                        const std::vector<std::pair<NodeId, NodeId>>& links) {
  Topology t;
  t.n = n;
  t.adj.resize(n);
  for (auto [a, b] : links) t.add_link(a, b);
  return t;
}

Topology Topology::kary_tree(uint32_t k, uint32_t h) {
  assert(k >= 2);
  int64_t n = 1, level = 1;
  for (uint32_t d = 1; d <= h; ++d) {
    level *= k;
    n += level;
  }
  Topology t;
  t.n = static_cast<int32_t>(n);
  t.adj.resize(t.n);
  for (int64_t i = 0; i < t.n; ++i)
    for (uint32_t c = 1; c <= k; ++c) {
      int64_t child = i * k + c;
      if (child < n) t.add_link((NodeId)i, (NodeId)child);
    }
  return t;
}

Topology Topology::line(int32_t n) {
  Topology t;
  t.n = n;
  t.adj.resize(n);
  for (NodeId i = 0; i + 1 < n; ++i) t.add_link(i, i + 1);
  return t;
}

Topology Topology::disk(int32_t n, double radius, uint64_t seed) {
  std::mt19937_64 rng(seed);
  // Raw 53-bit draws instead of a distribution object: the output must not
  // depend on the standard library's distribution implementation.
  auto unit = [&rng]() { return double(rng() >> 11) * 0x1.0p-53; };
  std::vector<double> x(n), y(n);
  for (int32_t i = 0; i < n; ++i) {
    x[i] = unit();
    y[i] = unit();
  }
  Topology t;
  t.n = n;
  t.adj.resize(n);
  double r2 = radius * radius;
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b) {
      double dx = x[a] - x[b], dy = y[a] - y[b];
      if (dx * dx + dy * dy <= r2) t.add_link(a, b);
    }
  return t;
}

}  // namespace rpltrail
