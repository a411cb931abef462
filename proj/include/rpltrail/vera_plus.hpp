#pragma once

#include <optional>

#include "rpltrail/vera.hpp"

namespace rpltrail {

// Root-side construction over the same chain set. The init pins both ends
// of the encryption chain; update i hands out the key that opens the
// currently anchored cipher.
VppInit make_vpp_init(const PrimitiveSuite& s, const ChainSet& c,
                      VersionNo vn0);
VppDio make_vpp_update(const PrimitiveSuite& s, const ChainSet& c,
                       VersionNo vn0, uint32_t i);

// Receiver state for the cipher-anchored scheme. anchor holds the committed
// ciphertext whose decryption yields the next update's rank chain tail; it
// advances to the delivered key only when the whole update checks out. Once
// anchor equals the signed final tail, the tail is read directly and no key
// is consumed.
struct VppStore {
  VersionNo vn0 = 0;
  Bytes v0;
  VersionNo vn = 0;
  Bytes v;
  Bytes anchor;
  Bytes cn;
  Bytes cur_tail;  // R_{vn,l} recovered at the last accepted update

  static std::optional<VppStore> from_init(const PrimitiveSuite& s,
                                           const VppInit& init);

  bool version_ok(const PrimitiveSuite& s, VersionNo vn_new,
                  const Bytes& v_new) const;

  SchemeVerdict apply_update(const PrimitiveSuite& s, const VppDio& d, Rank l);

  // Same-version rank claim: element hashes onto the recovered tail.
  bool rank_ok(const PrimitiveSuite& s, const Bytes& elem, Rank j,
               Rank l) const;
};

// --- challenge-response ---

// A prover at claimed rank j demonstrates possession of the rank j-1
// element by encrypting its identity and the challenge nonce under it.
// Packing: 4-byte id, 8-byte nonce, zero padding up to the cipher width.
// Narrow suites that cannot fit that layout pack both into one word:
// (id << 8) | low nonce byte.
Bytes challenge_pack(const PrimitiveSuite& s, NodeId id, uint64_t nonce);
Bytes challenge_answer(const PrimitiveSuite& s, const Bytes& key_elem,
                       NodeId self, uint64_t nonce);
bool challenge_check(const PrimitiveSuite& s, const Bytes& key_elem,
                     NodeId suspect, uint64_t nonce, const Bytes& cipher);

// Root's ruling over one accusation window.
enum class Adjudication {
  SuspectMalicious,     // failure notice stands unanswered
  ChallengerMalicious,  // a reviewed solution contradicts the accusation
  Inconclusive,
};
const char* to_string(Adjudication a);
Adjudication adjudicate(bool failure_notice, bool validation_report);

// --- isolation flood ---

Legitimation make_legitimation(const PrimitiveSuite& s, Rank challenger_rank,
                               Rank suspect_rank, NodeId accused);
bool legitimation_ok(const PrimitiveSuite& s, const Legitimation& lg);

// Scoped flood propagation: forwarding a legitimation keeps the hop limit
// intact next to the accused and burns one hop elsewhere, so the flood
// saturates the accused's neighborhood and dies off beyond it. Returns the
// hop limit to forward with, or nullopt when the flood stops here.
std::optional<int32_t> flood_forward_limit(int32_t hop_limit,
                                           bool adjacent_to_accused);

}  // namespace rpltrail
