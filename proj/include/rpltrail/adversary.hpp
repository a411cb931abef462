#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rpltrail/node.hpp"

namespace rpltrail {

// One attack instance. kind selects the behavior, nodes the compromised
// ids; for colluding chains the order is top-down (shallowest first).
struct AttackSpec {
  std::string kind;           // empty: everyone honest
  std::vector<NodeId> nodes;
  uint32_t at_version = 1;    // act when version vn0 + at_version is adopted
  int delta = 0;              // rank_spoof: claim max(0, rank - delta); 0 claims the root rank
  std::string variant;        // trail_manipulation sub-kind
};

bool attack_kind_known(const std::string& kind);

// Instantiates the right node class for id under the given attack.
std::unique_ptr<Node> make_protocol_node(NodeId id,
                                         std::shared_ptr<Shared> sh,
                                         const AttackSpec& atk);

}  // namespace rpltrail
