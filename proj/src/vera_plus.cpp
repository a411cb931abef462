#include "rpltrail/vera_plus.hpp"

namespace rpltrail {

namespace {

Bytes vpp_sig_msg(const Bytes& v0, VersionNo vn0, const Bytes& c1,
                  const Bytes& cn) {
  Bytes m = v0;
  Bytes vn = make_u64(vn0);
  m.insert(m.end(), vn.begin(), vn.end());
  m.insert(m.end(), c1.begin(), c1.end());
  m.insert(m.end(), cn.begin(), cn.end());
  return m;
}

Bytes legit_sig_msg(Rank challenger_rank, Rank suspect_rank, NodeId accused) {
  Bytes m = make_u64(uint64_t(uint32_t(challenger_rank)));
  Bytes b = make_u64(uint64_t(uint32_t(suspect_rank)));
  m.insert(m.end(), b.begin(), b.end());
  b = make_u64(uint64_t(uint32_t(accused)));
  m.insert(m.end(), b.begin(), b.end());
  return m;
}

}  // namespace

VppInit make_vpp_init(const PrimitiveSuite& s, const ChainSet& c,
                      VersionNo vn0) {
  VppInit init;
  init.v0 = c.version_chain[0];
  init.vn0 = vn0;
  init.c1 = c.enc_chain.front();
  init.cn = c.enc_chain.back();
  init.sig = s.root_signer->sign(vpp_sig_msg(init.v0, vn0, init.c1, init.cn));
  return init;
}

VppDio make_vpp_update(const PrimitiveSuite& s, const ChainSet& c,
                       VersionNo vn0, uint32_t i) {
  VppDio d;
  d.vn = vn0 + i;
  d.v = c.version_chain[i];
  if (i < c.n) d.key_cipher = c.enc_chain[i];  // c_{i+1}
  d.rank_elem = c.rank_element(s, i, 0);
  d.rank = 0;
  return d;
}

std::optional<VppStore> VppStore::from_init(const PrimitiveSuite& s,
                                            const VppInit& init) {
  if (!s.verify(vpp_sig_msg(init.v0, init.vn0, init.c1, init.cn), init.sig))
    return std::nullopt;
  VppStore st;
  st.vn0 = init.vn0;
  st.v0 = init.v0;
  st.vn = init.vn0;
  st.v = init.v0;
  st.anchor = init.c1;
  st.cn = init.cn;
  return st;
}

bool VppStore::version_ok(const PrimitiveSuite& s, VersionNo vn_new,
                          const Bytes& v_new) const {
  if (vn_new <= vn || vn_new - vn0 > kMaxChainWalk) return false;
  return hash_forward(s, v_new, vn_new - vn0) == v0;
}

SchemeVerdict VppStore::apply_update(const PrimitiveSuite& s, const VppDio& d,
                                     Rank l) {
  if (d.vn <= vn) return SchemeVerdict::StaleVersion;
  if (!version_ok(s, d.vn, d.v)) return SchemeVerdict::BadVersionChain;
  if (d.vn != vn + 1) return SchemeVerdict::DecryptAnchor;
  bool last = (anchor == cn);
  Bytes tail = last ? cn : s.dec(d.key_cipher, anchor);
  if (d.rank < 0 || d.rank > l ||
      hash_forward(s, d.rank_elem, uint64_t(l - d.rank)) != tail)
    return SchemeVerdict::DecryptAnchor;
  vn = d.vn;
  v = d.v;
  cur_tail = tail;
  if (!last) anchor = d.key_cipher;
  return SchemeVerdict::Accept;
}

bool VppStore::rank_ok(const PrimitiveSuite& s, const Bytes& elem, Rank j,
                       Rank l) const {
  if (j < 0 || j > l || cur_tail.empty()) return false;
  return hash_forward(s, elem, uint64_t(l - j)) == cur_tail;
}

Bytes challenge_pack(const PrimitiveSuite& s, NodeId id, uint64_t nonce) {
  if (s.width >= 12) {
    Bytes m(s.width, 0);
    Bytes idb = make_u64(uint64_t(uint32_t(id)));
    std::copy(idb.begin() + 4, idb.end(), m.begin());
    Bytes nb = make_u64(nonce);
    std::copy(nb.begin(), nb.end(), m.begin() + 4);
    return m;
  }
  return make_u64((uint64_t(uint32_t(id)) << 8) | (nonce & 0xff));
}

Bytes challenge_answer(const PrimitiveSuite& s, const Bytes& key_elem,
                       NodeId self, uint64_t nonce) {
  return s.enc(key_elem, challenge_pack(s, self, nonce));
}

bool challenge_check(const PrimitiveSuite& s, const Bytes& key_elem,
                     NodeId suspect, uint64_t nonce, const Bytes& cipher) {
  return s.enc(key_elem, challenge_pack(s, suspect, nonce)) == cipher;
}

const char* to_string(Adjudication a) {
  switch (a) {
    case Adjudication::SuspectMalicious: return "suspect_malicious";
    case Adjudication::ChallengerMalicious: return "challenger_malicious";
    case Adjudication::Inconclusive: return "inconclusive";
  }
  return "?";
}

Adjudication adjudicate(bool failure_notice, bool validation_report) {
  if (failure_notice && validation_report)
    return Adjudication::ChallengerMalicious;
  if (failure_notice) return Adjudication::SuspectMalicious;
  return Adjudication::Inconclusive;
}

Legitimation make_legitimation(const PrimitiveSuite& s, Rank challenger_rank,
                               Rank suspect_rank, NodeId accused) {
  Legitimation lg;
  lg.challenger_rank = challenger_rank;
  lg.suspect_rank = suspect_rank;
  lg.accused = accused;
  lg.sig = s.root_signer->sign(
      legit_sig_msg(challenger_rank, suspect_rank, accused));
  return lg;
}

bool legitimation_ok(const PrimitiveSuite& s, const Legitimation& lg) {
  return s.verify(legit_sig_msg(lg.challenger_rank, lg.suspect_rank,
                                lg.accused),
                  lg.sig);
}

std::optional<int32_t> flood_forward_limit(int32_t hop_limit,
                                           bool adjacent_to_accused) {
  int32_t next = adjacent_to_accused ? hop_limit : hop_limit - 1;
  if (next <= 0) return std::nullopt;
  return next;
}

}  // namespace rpltrail
