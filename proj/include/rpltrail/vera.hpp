#pragma once

#include <optional>

#include "rpltrail/chains.hpp"
#include "rpltrail/messages.hpp"

namespace rpltrail {

enum class SchemeVerdict {
  Accept,
  BadSignature,
  StaleVersion,
  BadVersionChain,
  BadRankMac,      // rank element fails its mac anchor or lies out of range
  DecryptAnchor,   // rank element does not close on the decrypted tail
  RankRegression,  // derivation toward a shallower rank was requested
};

const char* to_string(SchemeVerdict v);

// Upper bound on accepted version jumps; keeps the chain walk finite when a
// forged message carries an absurd version number.
constexpr uint32_t kMaxChainWalk = 1u << 20;

// Root-side construction. Update i covers versions 1..n of the chain set;
// the final update carries an empty follow-up mac since nothing follows it.
VeraInit make_vera_init(const PrimitiveSuite& s, const ChainSet& c,
                        VersionNo vn0);
VeraDio make_vera_update(const PrimitiveSuite& s, const ChainSet& c,
                         VersionNo vn0, uint32_t i);

// mac-anchored rank test: anchor == mac(v_elem, h^(l-j)(elem)), j in [0, l].
bool rank_mac_ok(const PrimitiveSuite& s, const Bytes& anchor,
                 const Bytes& v_elem, const Bytes& elem, Rank j, Rank l);

// h^(to-from); refuses sideways or upward derivation, which would amount to
// inverting the chain.
std::optional<Bytes> derive_rank_element(const PrimitiveSuite& s,
                                         const Bytes& elem, Rank from,
                                         Rank to);

// Receiver state for the mac-anchored scheme. cur_mac authenticates rank
// elements of the accepted version; next_mac arrived one update early and
// authenticates the following version. Both rotate only on Accept.
struct VeraStore {
  VersionNo vn0 = 0;
  Bytes v0;
  VersionNo vn = 0;
  Bytes v;
  Bytes cur_mac;
  Bytes next_mac;

  static std::optional<VeraStore> from_init(const PrimitiveSuite& s,
                                            const VeraInit& init);

  // Monotone version number whose element hashes back onto the signed v0.
  bool version_ok(const PrimitiveSuite& s, VersionNo vn_new,
                  const Bytes& v_new) const;

  // Version test, then rank test against the early-delivered anchor.
  // Mutates only on Accept.
  SchemeVerdict apply_update(const PrimitiveSuite& s, const VeraDio& d,
                             Rank l);

  // Same-version rank claim from any neighbor.
  bool rank_ok(const PrimitiveSuite& s, const Bytes& elem, Rank j,
               Rank l) const;
};

}  // namespace rpltrail
