#include "rpltrail/vera.hpp"

namespace rpltrail {

const char* to_string(SchemeVerdict v) {
  switch (v) {
    case SchemeVerdict::Accept: return "accept";
    case SchemeVerdict::BadSignature: return "bad_signature";
    case SchemeVerdict::StaleVersion: return "stale_version";
    case SchemeVerdict::BadVersionChain: return "bad_version_chain";
    case SchemeVerdict::BadRankMac: return "bad_rank_mac";
    case SchemeVerdict::DecryptAnchor: return "decrypt_anchor";
    case SchemeVerdict::RankRegression: return "rank_regression";
  }
  return "?";
}

namespace {

Bytes init_sig_msg(const Bytes& v0, VersionNo vn0, const Bytes& mac1) {
  Bytes m = v0;
  Bytes vn = make_u64(vn0);
  m.insert(m.end(), vn.begin(), vn.end());
  m.insert(m.end(), mac1.begin(), mac1.end());
  return m;
}

}  // namespace

VeraInit make_vera_init(const PrimitiveSuite& s, const ChainSet& c,
                        VersionNo vn0) {
  VeraInit init;
  init.v0 = c.version_chain[0];
  init.vn0 = vn0;
  init.mac1 = s.mac(c.version_chain[1], c.rank_tails[0]);
  init.sig = s.root_signer->sign(init_sig_msg(init.v0, vn0, init.mac1));
  return init;
}

VeraDio make_vera_update(const PrimitiveSuite& s, const ChainSet& c,
                         VersionNo vn0, uint32_t i) {
  VeraDio d;
  d.vn = vn0 + i;
  d.v = c.version_chain[i];
  if (i < c.n)
    d.next_mac = s.mac(c.version_chain[i + 1], c.rank_tails[i]);
  d.rank_elem = c.rank_element(s, i, 0);
  d.rank = 0;
  return d;
}

bool rank_mac_ok(const PrimitiveSuite& s, const Bytes& anchor,
                 const Bytes& v_elem, const Bytes& elem, Rank j, Rank l) {
  if (j < 0 || j > l || anchor.empty()) return false;
  return s.mac(v_elem, hash_forward(s, elem, uint64_t(l - j))) == anchor;
}

std::optional<Bytes> derive_rank_element(const PrimitiveSuite& s,
                                         const Bytes& elem, Rank from,
                                         Rank to) {
  if (to <= from) return std::nullopt;
  return hash_forward(s, elem, uint64_t(to - from));
}

std::optional<VeraStore> VeraStore::from_init(const PrimitiveSuite& s,
                                              const VeraInit& init) {
  if (!s.verify(init_sig_msg(init.v0, init.vn0, init.mac1), init.sig))
    return std::nullopt;
  VeraStore st;
  st.vn0 = init.vn0;
  st.v0 = init.v0;
  st.vn = init.vn0;
  st.v = init.v0;
  st.next_mac = init.mac1;
  return st;
}

bool VeraStore::version_ok(const PrimitiveSuite& s, VersionNo vn_new,
                           const Bytes& v_new) const {
  if (vn_new <= vn || vn_new - vn0 > kMaxChainWalk) return false;
  return hash_forward(s, v_new, vn_new - vn0) == v0;
}

SchemeVerdict VeraStore::apply_update(const PrimitiveSuite& s,
                                      const VeraDio& d, Rank l) {
  if (d.vn <= vn) return SchemeVerdict::StaleVersion;
  if (!version_ok(s, d.vn, d.v)) return SchemeVerdict::BadVersionChain;
  // Anchors are delivered exactly one update ahead, so a version gap leaves
  // the rank material unverifiable.
  if (d.vn != vn + 1) return SchemeVerdict::BadRankMac;
  if (!rank_mac_ok(s, next_mac, d.v, d.rank_elem, d.rank, l))
    return SchemeVerdict::BadRankMac;
  vn = d.vn;
  v = d.v;
  cur_mac = next_mac;
  next_mac = d.next_mac;
  return SchemeVerdict::Accept;
}

bool VeraStore::rank_ok(const PrimitiveSuite& s, const Bytes& elem, Rank j,
                        Rank l) const {
  return rank_mac_ok(s, cur_mac, v, elem, j, l);
}

}  // namespace rpltrail
