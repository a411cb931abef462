#include "rpltrail/trail.hpp"

#include <algorithm>
#include <cmath>

namespace rpltrail {

bool trail_hop_ok(Rank own, Rank scribed, Rank sender) {
  return scribed > own && sender > own && sender <= scribed;
}

bool trail_down_ok(Rank own, Rank scribed) { return scribed > own; }

Bytes trail_signed_msg(Nonce nonce, Rank scribed, VersionNo vn) {
  Bytes m = make_u64(nonce);
  Bytes b = make_u64(uint64_t(uint32_t(scribed)));
  m.insert(m.end(), b.begin(), b.end());
  b = make_u64(vn);
  m.insert(m.end(), b.begin(), b.end());
  return m;
}

TrailSigned make_trail_signed(const PrimitiveSuite& s, Nonce nonce,
                              Rank scribed, VersionNo vn) {
  TrailSigned t;
  t.nonce = nonce;
  t.scribed = scribed;
  t.vn = vn;
  t.sig = s.root_signer->sign(trail_signed_msg(nonce, scribed, vn));
  return t;
}

bool trail_signed_ok(const PrimitiveSuite& s, const TrailSigned& t) {
  return s.verify(trail_signed_msg(t.nonce, t.scribed, t.vn), t.sig);
}

FilterArray trail_merge(uint32_t m, uint32_t k_hash, const Intake& intake) {
  FilterArray out;
  if (intake.empty()) return out;
  BloomFilter first(m, k_hash);
  size_t depth = 0;
  for (const auto& [id, c] : intake) {
    if (c.has_nonce) first.insert(c.nonce);
    depth = std::max(depth, c.array.size());
  }
  out.elems.resize(1 + depth);
  out.elems[0].slices.push_back(first);
  for (size_t lvl = 0; lvl < depth; ++lvl)
    for (const auto& [id, c] : intake)
      if (lvl < c.array.size())
        for (const BloomFilter& sl : c.array.elems[lvl].slices)
          out.elems[lvl + 1].slices.push_back(sl);
  return out;
}

std::optional<std::pair<size_t, size_t>> locate_block(NodeId x, size_t elem_no,
                                                      NodeId root,
                                                      const MergeInfo& mi) {
  size_t lvl = elem_no, off = 0;
  NodeId cur = x;
  size_t guard = mi.merger_of.size() + 1;
  while (cur != root) {
    if (guard-- == 0) return std::nullopt;  // merge cycle
    auto mit = mi.merger_of.find(cur);
    if (mit == mi.merger_of.end()) return std::nullopt;
    NodeId m = mit->second;
    auto iit = mi.intake.find(m);
    if (iit == mi.intake.end()) return std::nullopt;
    bool found = false;
    for (const auto& [child, contrib] : iit->second) {
      if (child == cur) {
        found = true;
        break;
      }
      if (lvl - 1 < contrib.array.size())
        off += contrib.array.elems[lvl - 1].slice_count();
    }
    if (!found) return std::nullopt;
    ++lvl;
    cur = m;
  }
  return std::make_pair(lvl, off);
}

const char* to_string(TrailVerdict v) {
  switch (v) {
    case TrailVerdict::Verified: return "verified";
    case TrailVerdict::BadSignature: return "bad_signature";
    case TrailVerdict::WrongVersion: return "wrong_version";
    case TrailVerdict::NonceMissing: return "nonce_missing";
    case TrailVerdict::NonceDuplicated: return "nonce_duplicated";
    case TrailVerdict::ArrayShrunk: return "array_shrunk";
  }
  return "?";
}

Bytes attest_msg(const TrailAttest& a) {
  Bytes m = make_u64(a.vn);
  m.push_back(uint8_t(a.array.size()));
  for (const FilterElement& e : a.array.elems) encode_element(e, m);
  return m;
}

TrailAttest make_attest(const PrimitiveSuite& s, VersionNo vn,
                        FilterArray array) {
  TrailAttest a;
  a.vn = vn;
  a.array = std::move(array);
  a.sig = s.root_signer->sign(attest_msg(a));
  return a;
}

TrailVerdict verify_attestation(const PrimitiveSuite& s, const TrailAttest& a,
                                VersionNo expect_vn, NodeId self, Rank rank,
                                Nonce nonce, const TrailContrib& sent,
                                NodeId root, const MergeInfo& mi) {
  if (!s.verify(attest_msg(a), a.sig)) return TrailVerdict::BadSignature;
  if (a.vn != expect_vn) return TrailVerdict::WrongVersion;
  size_t n = a.array.size();
  if (rank < 1 || size_t(rank) > n || !a.array.elems[rank - 1].query(nonce))
    return TrailVerdict::NonceMissing;
  for (size_t i = 0; i < n; ++i)
    if (i != size_t(rank - 1) && a.array.elems[i].query(nonce))
      return TrailVerdict::NonceDuplicated;
  for (size_t t = 1; t <= sent.array.size(); ++t) {
    auto loc = locate_block(self, t, root, mi);
    if (!loc) return TrailVerdict::ArrayShrunk;
    auto [fin, off] = *loc;
    if (fin < 1 || fin > n) return TrailVerdict::ArrayShrunk;
    const auto& mine = sent.array.elems[t - 1].slices;
    const auto& have = a.array.elems[fin - 1].slices;
    if (off + mine.size() > have.size()) return TrailVerdict::ArrayShrunk;
    for (size_t i = 0; i < mine.size(); ++i)
      if (!(have[off + i] == mine[i])) return TrailVerdict::ArrayShrunk;
  }
  return TrailVerdict::Verified;
}

std::optional<SizePrediction> predicted_sizes(uint32_t k_fanout, uint32_t h) {
  if (k_fanout < 2 || h < 1) return std::nullopt;
  // nodes = (k^(h+1) - 1) / (k - 1), checked step by step.
  unsigned long long power = 1, nodes = 0;
  for (uint32_t d = 0; d <= h; ++d) {
    if (nodes > (~0ull) - power) return std::nullopt;
    nodes += power;
    if (d < h && power > (~0ull) / k_fanout) return std::nullopt;
    if (d < h) power *= k_fanout;
  }
  SizePrediction p;
  p.nodes = nodes;
  p.slice_bytes = 6.0 * k_fanout / 8.0;
  // Upward payload from depth d covers its subtree: slices sum to
  // (k^(h-d) - 1) / (k - 1). Depth 0 is the root's own assembly, which is
  // also the largest message in the run.
  p.per_depth_up_bytes.resize(h + 1);
  for (uint32_t d = 0; d <= h; ++d) {
    double slices =
        (std::pow(double(k_fanout), double(h - d)) - 1.0) / (k_fanout - 1.0);
    p.per_depth_up_bytes[d] = p.slice_bytes * slices;
  }
  p.max_bytes = p.per_depth_up_bytes[0];
  p.avg_bytes = p.max_bytes / (k_fanout + 1);
  return p;
}

}  // namespace rpltrail
