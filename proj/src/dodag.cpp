#include "rpltrail/dodag.hpp"

#include <algorithm>
#include <deque>

namespace rpltrail {

const char* to_string(DatagramVerdict v) {
  switch (v) {
    case DatagramVerdict::Accept: return "accept";
    case DatagramVerdict::UnknownNeighbor: return "unknown_neighbor";
    case DatagramVerdict::AnnouncementMismatch: return "announcement_mismatch";
    case DatagramVerdict::ChildRankViolation: return "child_rank_violation";
    case DatagramVerdict::DirectionViolation: return "direction_violation";
  }
  return "?";
}

bool NodeState::reselect() {
  if (is_root) {
    rank = 0;
    preferred_parent = kNoNode;
    return true;
  }
  NodeId best = kNoNode;
  Rank best_rank = kNoRank;
  for (const auto& [nbr, r] : neighbor_ranks) {
    if (r == kNoRank || blocked.count(nbr)) continue;
    if (best == kNoNode || r < best_rank || (r == best_rank && nbr < best)) {
      best = nbr;
      best_rank = r;
    }
  }
  parent_set.clear();
  if (best == kNoNode) {
    preferred_parent = kNoNode;
    rank = kNoRank;
    return false;
  }
  preferred_parent = best;
  rank = best_rank + 1;
  for (const auto& [nbr, r] : neighbor_ranks)
    if (r != kNoRank && !blocked.count(nbr) && r < rank) parent_set.insert(nbr);
  return true;
}

DatagramVerdict validate_datagram(const NodeState& s, NodeId from,
                                  const Datagram& d) {
  auto it = s.announced_ranks.find(from);
  if (it == s.announced_ranks.end()) return DatagramVerdict::UnknownNeighbor;
  if (it->second != d.sender_rank) return DatagramVerdict::AnnouncementMismatch;
  if (d.upward && s.children.count(from) && d.sender_rank <= s.rank)
    return DatagramVerdict::ChildRankViolation;
  bool ok = d.upward ? d.sender_rank > s.rank : d.sender_rank < s.rank;
  if (!ok) return DatagramVerdict::DirectionViolation;
  return DatagramVerdict::Accept;
}

Dodag build_dodag(const Topology& t, NodeId root) {
  Dodag d;
  std::vector<Rank> rank(t.n, kNoRank);
  std::deque<NodeId> q{root};
  rank[root] = 0;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    for (NodeId v : t.adj[u])
      if (rank[v] == kNoRank) {
        rank[v] = rank[u] + 1;
        q.push_back(v);
      }
  }

  for (NodeId i = 0; i < t.n; ++i) {
    if (rank[i] == kNoRank) {
      d.unreachable.push_back(i);
      continue;
    }
    NodeState s;
    s.id = i;
    s.is_root = (i == root);
    for (NodeId nbr : t.adj[i])
      if (rank[nbr] != kNoRank) s.neighbor_ranks[nbr] = rank[nbr];
    s.reselect();
    d.nodes.emplace(i, std::move(s));
  }

  for (auto& [id, s] : d.nodes)
    if (s.preferred_parent != kNoNode)
      d.nodes.at(s.preferred_parent).children.insert(id);

  // Storing mode: aggregate descendant sets bottom-up along the parent tree.
  std::vector<NodeId> order;
  for (const auto& [id, s] : d.nodes) order.push_back(id);
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return d.nodes.at(a).rank > d.nodes.at(b).rank;
  });
  for (NodeId id : order) {
    NodeState& s = d.nodes.at(id);
    if (s.preferred_parent == kNoNode) continue;
    auto& up = d.nodes.at(s.preferred_parent).routes[id];
    up.insert(id);
    for (const auto& [child, below] : s.routes)
      up.insert(below.begin(), below.end());
  }
  return d;
}

}  // namespace rpltrail
