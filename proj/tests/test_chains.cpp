#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rpltrail/chains.hpp"
#include "rpltrail/primitives.hpp"

using namespace rpltrail;

namespace {

// Independent oracle: plain loop over the suite hash, no shared code with
// the chain builders.
Bytes iter_hash(const PrimitiveSuite& s, Bytes e, uint64_t t) {
  while (t--) e = s.hash(e);
  return e;
}

uint64_t val(const Bytes& b) { return load_u64(b); }
Bytes elem(uint64_t v) { return make_u64(v); }

}  // namespace

TEST_CASE("test suite arithmetic") {
  auto s = make_test_suite();
  CHECK(val(s.hash(elem(0))) == 1);
  CHECK(val(s.hash(elem(12))) == 13);
  CHECK(val(s.enc(elem(3), elem(5))) == 6);
  CHECK(val(s.dec(elem(3), elem(6))) == 5);
  // mac(k, m) = h(k xor m)
  CHECK(val(s.mac(elem(3), elem(5))) == 7);
}

TEST_CASE("version chain, test suite worked examples") {
  auto s = make_test_suite();
  auto chain = build_version_chain(s, elem(0), 3);
  REQUIRE(chain.size() == 4);
  CHECK(val(chain[0]) == 4);
  CHECK(val(chain[1]) == 3);
  CHECK(val(chain[2]) == 2);
  CHECK(val(chain[3]) == 1);

  auto single = build_version_chain(s, elem(7), 0);
  REQUIRE(single.size() == 1);
  CHECK(val(single[0]) == 8);
}

TEST_CASE("rank chain, test suite worked example") {
  auto s = make_test_suite();
  auto chain = build_rank_chain(s, elem(10), 3);
  REQUIRE(chain.size() == 4);
  CHECK(val(chain[0]) == 11);
  CHECK(val(chain[1]) == 12);
  CHECK(val(chain[2]) == 13);
  CHECK(val(chain[3]) == 14);
}

TEST_CASE("encryption chain, test suite worked example") {
  auto s = make_test_suite();
  std::vector<Bytes> tails = {elem(5), elem(6), elem(7)};
  auto c = build_encryption_chain(s, tails);
  REQUIRE(c.size() == 3);
  CHECK(val(c[2]) == 7);        // c_3 = R_{3,l}
  CHECK(val(c[1]) == (6 ^ 7));  // c_2 = enc_{c_3}(R_{2,l}) = 1
  CHECK(val(c[0]) == (5 ^ 1));  // c_1 = enc_{c_2}(R_{1,l}) = 4
  CHECK(s.dec(c[1], c[0]) == tails[0]);

  auto one = build_encryption_chain(s, {elem(9)});
  REQUIRE(one.size() == 1);
  CHECK(val(one[0]) == 9);
}

TEST_CASE("hash_forward") {
  auto s = make_test_suite();
  CHECK(val(hash_forward(s, elem(12), 2)) == 14);
  CHECK(val(hash_forward(s, elem(12), 0)) == 12);
}

TEST_CASE("hash_forward composition law, both suites") {
  std::mt19937_64 rng(11);
  for (auto& s : {make_test_suite(), make_production_suite()}) {
    for (int trial = 0; trial < 100; ++trial) {
      Bytes e = random_element(rng, s.width);
      uint64_t a = rng() % 20, b = rng() % 20;
      CHECK(hash_forward(s, hash_forward(s, e, a), b) ==
            hash_forward(s, e, a + b));
    }
  }
}

TEST_CASE("production chain values against independent iteration") {
  auto s = make_production_suite();
  Bytes zero(16, 0);

  // Frozen digests for the truncated SHA-256, plus the loop oracle.
  CHECK(to_hex(s.hash(zero)) == "374708fff7719dd5979ec875d56cd228");
  CHECK(to_hex(s.hash(s.hash(zero))) == "f75dbe115a677184d86eda0e51fee357");
  CHECK(to_hex(s.mac(s.hash(zero), s.hash(s.hash(zero)))) ==
        "4b5e052ad5adf14e8d5d8f95f2a040e2");

  auto chain = build_version_chain(s, zero, 16);
  REQUIRE(chain.size() == 17);
  CHECK(chain[0] == iter_hash(s, zero, 17));
  CHECK(to_hex(chain[0]) == "1d6a6b248c966eea3cff5d18f145f92a");
  CHECK(chain[16] == iter_hash(s, zero, 1));

  Bytes x = from_hex("01000000000000000000000000000000");
  auto rank = build_rank_chain(s, x, 64);
  REQUIRE(rank.size() == 65);
  CHECK(rank[63] == iter_hash(s, x, 64));
  CHECK(to_hex(rank[63]) == "742f6ebfeaab65ca808aa509442729a8");
  CHECK(rank[0] == s.hash(x));
}

TEST_CASE("chain algebra over all index pairs, l = 16") {
  std::mt19937_64 rng(17);
  for (auto& s : {make_test_suite(), make_production_suite()}) {
    const uint32_t l = 16;
    auto chain = build_rank_chain(s, random_element(rng, s.width), l);
    for (uint32_t j = 0; j <= l; ++j)
      for (uint32_t jp = j; jp <= l; ++jp)
        CHECK(hash_forward(s, chain[j], jp - j) == chain[jp]);
  }
}

TEST_CASE("encryption chain inversion recovers every tail") {
  std::mt19937_64 rng(23);
  for (auto& s : {make_test_suite(), make_production_suite()}) {
    std::vector<Bytes> tails;
    for (int i = 0; i < 8; ++i) tails.push_back(random_element(rng, s.width));
    auto c = build_encryption_chain(s, tails);
    // Key ladder downward: c_n is the last tail in clear, every dec step
    // with the successor cipher reveals the next tail.
    std::vector<Bytes> recovered(8);
    recovered[7] = c[7];
    for (int i = 6; i >= 0; --i) recovered[i] = s.dec(c[i + 1], c[i]);
    CHECK(recovered == tails);
  }
}

TEST_CASE("enc/dec roundtrip, both suites") {
  std::mt19937_64 rng(31);
  for (auto& s : {make_test_suite(), make_production_suite()}) {
    for (int trial = 0; trial < 50; ++trial) {
      Bytes k = random_element(rng, s.width);
      Bytes m = random_element(rng, s.width);
      CHECK(s.dec(k, s.enc(k, m)) == m);
    }
  }
}

TEST_CASE("signature accepts the message and rejects bit flips") {
  std::mt19937_64 rng(37);
  for (auto& s : {make_test_suite(), make_production_suite()}) {
    Bytes msg = random_element(rng, 40);
    Bytes sig = s.root_signer->sign(msg);
    CHECK(sig.size() == s.sig_width);
    CHECK(s.verify(msg, sig));
    for (int trial = 0; trial < 32; ++trial) {
      Bytes m2 = msg;
      m2[rng() % m2.size()] ^= (uint8_t)(1u << (rng() % 8));
      CHECK_FALSE(s.verify(m2, sig));
      Bytes s2 = sig;
      s2[rng() % s2.size()] ^= (uint8_t)(1u << (rng() % 8));
      CHECK_FALSE(s.verify(msg, s2));
    }
  }
}

TEST_CASE("ChainSet invariants, both suites") {
  std::mt19937_64 rng(41);
  for (auto& s : {make_test_suite(), make_production_suite()}) {
    auto cs = ChainSet::build(s, rng, 6, 12);
    REQUIRE(cs.version_chain.size() == 7);
    REQUIRE(cs.rank_seeds.size() == 6);
    REQUIRE(cs.rank_tails.size() == 6);
    REQUIRE(cs.enc_chain.size() == 6);
    for (int i = 1; i <= 6; ++i)
      CHECK(s.hash(cs.version_chain[i]) == cs.version_chain[i - 1]);
    for (int i = 1; i <= 6; ++i) {
      CHECK(cs.rank_tails[i - 1] == iter_hash(s, cs.rank_seeds[i - 1], 13));
      CHECK(cs.rank_element(s, i, 12) == cs.rank_tails[i - 1]);
      CHECK(s.hash(cs.rank_element(s, i, 4)) == cs.rank_element(s, i, 5));
    }
    CHECK(cs.enc_chain[5] == cs.rank_tails[5]);
    for (int i = 0; i < 5; ++i)
      CHECK(s.dec(cs.enc_chain[i + 1], cs.enc_chain[i]) == cs.rank_tails[i]);
  }
}

TEST_CASE("no preimage of a chain element in 1e5 random samples") {
  auto s = make_production_suite();
  std::mt19937_64 rng(43);
  Bytes x = random_element(rng, s.width);
  Bytes target = hash_forward(s, x, 2);  // R_1 of the chain from x
  int hits = 0;
  for (int i = 0; i < 100000; ++i) {
    Bytes cand = random_element(rng, s.width);
    if (s.hash(cand) == target) ++hits;
  }
  CHECK(hits == 0);
}
