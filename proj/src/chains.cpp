#include "rpltrail/chains.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace rpltrail {

Bytes hash_forward(const PrimitiveSuite& s, Bytes e, uint64_t t) {
  for (uint64_t i = 0; i < t; ++i) e = s.hash(e);
  return e;
}

std::vector<Bytes> build_version_chain(const PrimitiveSuite& s, const Bytes& r,
                                       uint32_t n) {
  // Walk forward from the secret and reverse: the last value computed,
  // h^(n+1)(r), is V_0.
  std::vector<Bytes> chain(n + 1);
  Bytes cur = r;
  for (uint32_t i = 0; i <= n; ++i) {
    cur = s.hash(cur);
    chain[n - i] = cur;
  }
  return chain;
}

std::vector<Bytes> build_rank_chain(const PrimitiveSuite& s, const Bytes& x,
                                    uint32_t l) {
  std::vector<Bytes> chain(l + 1);
  Bytes cur = x;
  for (uint32_t j = 0; j <= l; ++j) {
    cur = s.hash(cur);
    chain[j] = cur;
  }
  return chain;
}

std::vector<Bytes> build_encryption_chain(const PrimitiveSuite& s,
                                          const std::vector<Bytes>& tails) {
  if (tails.empty()) return {};
  size_t n = tails.size();
  std::vector<Bytes> c(n);
  c[n - 1] = tails[n - 1];
  for (size_t i = n - 1; i-- > 0;) c[i] = s.enc(c[i + 1], tails[i]);
  return c;
}

Bytes random_element(std::mt19937_64& rng, size_t width) {
  Bytes b(width);
  for (auto& v : b) v = static_cast<uint8_t>(rng() & 0xff);
  return b;
}

ChainSet ChainSet::build(const PrimitiveSuite& s, std::mt19937_64& rng,
                         uint32_t n, uint32_t l) {
  ChainSet cs;
  cs.n = n;
  cs.l = l;
  Bytes r = random_element(rng, s.width);
  cs.version_chain = build_version_chain(s, r, n);
  cs.rank_seeds.reserve(n);
  cs.rank_tails.reserve(n);
  for (uint32_t i = 0; i < n; ++i) {
    Bytes x = random_element(rng, s.width);
    cs.rank_seeds.push_back(x);
    cs.rank_tails.push_back(hash_forward(s, x, l + 1));
  }
  cs.enc_chain = build_encryption_chain(s, cs.rank_tails);
  return cs;
}

Bytes ChainSet::rank_element(const PrimitiveSuite& s, uint32_t i,
                             uint32_t j) const {
  assert(i >= 1 && i <= n && j <= l);
  return hash_forward(s, rank_seeds[i - 1], j + 1);
}

}  // namespace rpltrail
