#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rpltrail/primitives.hpp"

namespace rpltrail {

// t-fold iterated hash, h^t. t = 0 is the identity.
Bytes hash_forward(const PrimitiveSuite& s, Bytes e, uint64_t t);

// Version hash chain V_0..V_n from secret r: V_i = h^(n+1-i)(r), so V_n is
// one application away from the secret and V_0 anchors the whole chain.
std::vector<Bytes> build_version_chain(const PrimitiveSuite& s, const Bytes& r,
                                       uint32_t n);

// Per-version rank chain R_0..R_l from secret x: R_j = h^(j+1)(x). Index j
// is the rank the element authenticates; l is the deepest usable rank.
std::vector<Bytes> build_rank_chain(const PrimitiveSuite& s, const Bytes& x,
                                    uint32_t l);

// Backward encryption chain over rank chain tails. Input tails[0..n-1] are
// R_{1,l}..R_{n,l}; output c[0..n-1] = c_1..c_n with c_n = tails[n-1] and
// c_i = enc_{c_{i+1}}(tails[i-1]). Knowing c_{i+1} unlocks exactly R_{i,l},
// nothing earlier.
std::vector<Bytes> build_encryption_chain(const PrimitiveSuite& s,
                                          const std::vector<Bytes>& tails);

Bytes random_element(std::mt19937_64& rng, size_t width);

// Everything the root derives from its secrets for one deployment: n
// versions of rank authentication material plus the version chain that keys
// and orders it.
struct ChainSet {
  uint32_t n = 0;
  uint32_t l = 0;
  std::vector<Bytes> version_chain;  // V_0..V_n
  std::vector<Bytes> rank_seeds;     // x_1..x_n
  std::vector<Bytes> rank_tails;     // R_{1,l}..R_{n,l}
  std::vector<Bytes> enc_chain;      // c_1..c_n

  static ChainSet build(const PrimitiveSuite& s, std::mt19937_64& rng,
                        uint32_t n, uint32_t l);

  // R_{i,j}, recomputed from the stored seed. i in [1,n], j in [0,l].
  Bytes rank_element(const PrimitiveSuite& s, uint32_t i, uint32_t j) const;
};

}  // namespace rpltrail
