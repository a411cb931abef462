#pragma once

#include <map>
#include <optional>
#include <utility>

#include "rpltrail/bloom.hpp"
#include "rpltrail/messages.hpp"
#include "rpltrail/primitives.hpp"

namespace rpltrail {

// --- single-path rank test ---

// Check applied by every forwarder of an upward rank test. own is the
// forwarder's rank, scribed the rank the initiator's parent wrote into the
// test, sender the rank of the hop it just arrived from. The scribe must
// lie strictly below, and the sender strictly between us and the scribe.
bool trail_hop_ok(Rank own, Rank scribed, Rank sender);

// Downward leg: keep forwarding while the scribed rank is still below us.
bool trail_down_ok(Rank own, Rank scribed);

Bytes trail_signed_msg(Nonce nonce, Rank scribed, VersionNo vn);
TrailSigned make_trail_signed(const PrimitiveSuite& s, Nonce nonce,
                              Rank scribed, VersionNo vn);
bool trail_signed_ok(const PrimitiveSuite& s, const TrailSigned& t);

// --- convergecast attestation ---

// What one merger takes in, keyed (and therefore ordered) by contributor id.
using Intake = std::map<NodeId, TrailContrib>;

// One aggregation step: a fresh first element collects the contributors'
// nonces; every deeper element is the ordered concatenation of the
// contributors' elements one level up. No bits are ever or-ed across
// contributors, so each slice stays attributable.
FilterArray trail_merge(uint32_t m, uint32_t k_hash, const Intake& intake);

// Who merged whose contribution, reconstructed from the observed traffic of
// one collection round. Offsets into the final array follow from it even
// when a merge happened somewhere other than the contributor's parent.
struct MergeInfo {
  std::map<NodeId, NodeId> merger_of;
  std::map<NodeId, Intake> intake;
};

// Final element number (1-based) and slice offset of contributor x's
// element elem_no inside the root's assembled array. nullopt when the merge
// chain toward root is broken.
std::optional<std::pair<size_t, size_t>> locate_block(NodeId x, size_t elem_no,
                                                      NodeId root,
                                                      const MergeInfo& mi);

enum class TrailVerdict {
  Verified,
  BadSignature,
  WrongVersion,
  NonceMissing,     // own nonce absent at the element matching our rank
  NonceDuplicated,  // own nonce also present somewhere it cannot be
  ArrayShrunk,      // own forwarded data missing or mangled
};
const char* to_string(TrailVerdict v);

Bytes attest_msg(const TrailAttest& a);
TrailAttest make_attest(const PrimitiveSuite& s, VersionNo vn,
                        FilterArray array);

// The five acceptance checks a node runs against the signed array, in
// order: signature, version, own nonce present at its rank, absent
// elsewhere, own forwarded array intact at its aligned position.
TrailVerdict verify_attestation(const PrimitiveSuite& s, const TrailAttest& a,
                                VersionNo expect_vn, NodeId self, Rank rank,
                                Nonce nonce, const TrailContrib& sent,
                                NodeId root, const MergeInfo& mi);

// --- closed-form message sizes for a full k-ary tree of height h ---

struct SizePrediction {
  unsigned long long nodes = 0;
  double slice_bytes = 0;  // one slice is 6k bits
  double max_bytes = 0;    // the root's assembled array
  double avg_bytes = 0;    // headline convention: max spread over k+1
  std::vector<double> per_depth_up_bytes;  // [d] = upward payload from depth d
};

// nullopt when k < 2, h < 1, or the node count overflows.
std::optional<SizePrediction> predicted_sizes(uint32_t k_fanout, uint32_t h);

}  // namespace rpltrail
