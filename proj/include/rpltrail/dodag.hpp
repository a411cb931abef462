#pragma once

#include <map>
#include <set>
#include <vector>

#include "rpltrail/graph.hpp"
#include "rpltrail/messages.hpp"

namespace rpltrail {

// Verdict for a datagram arriving at a routing node. Ordered by the
// sequence in which the checks run; the first failing check names the
// verdict.
enum class DatagramVerdict {
  Accept,
  UnknownNeighbor,       // sender never announced a rank on this link
  AnnouncementMismatch,  // carried rank differs from the announcement
  ChildRankViolation,    // own child claims a rank at or above ours
  DirectionViolation,    // rank does not decrease toward the root
};

const char* to_string(DatagramVerdict v);

// Per-node routing state. neighbor_ranks holds ranks that passed whatever
// verification the active scheme requires; announced_ranks holds claims
// made for datagram gating, which are never used for parent selection.
struct NodeState {
  NodeId id = kNoNode;
  bool is_root = false;
  VersionNo version = 0;
  Rank rank = kNoRank;
  NodeId preferred_parent = kNoNode;
  std::set<NodeId> parent_set;
  std::set<NodeId> children;
  std::map<NodeId, std::set<NodeId>> routes;  // next-hop child -> descendants
  std::map<NodeId, Rank> neighbor_ranks;
  std::map<NodeId, Rank> announced_ranks;
  std::set<NodeId> blocked;

  bool attached() const { return is_root || preferred_parent != kNoNode; }

  // Recompute preferred parent and rank from the verified neighbor view,
  // skipping blocked neighbors. Ties break toward the lower id. Returns
  // false when no usable parent remains (the node detaches).
  bool reselect();
};

DatagramVerdict validate_datagram(const NodeState& s, NodeId from,
                                  const Datagram& d);

struct Dodag {
  std::map<NodeId, NodeState> nodes;
  std::vector<NodeId> unreachable;
};

// Ground-truth construction used for baselines and report checks: hop
// ranks from the root, parent = lowest (rank, id) neighbor, storing-mode
// routes aggregated over the parent tree.
Dodag build_dodag(const Topology& t, NodeId root = 0);

}  // namespace rpltrail
