#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "rpltrail/vera.hpp"

using namespace rpltrail;

namespace {

Bytes be(uint64_t x) { return make_u64(x); }

// Hand-built chain material with single-step arithmetic (h adds one), so
// every expected value below is checkable by eye: versions count down from
// 0x24, rank chains count up from their seeds.
ChainSet tiny_chains() {
  ChainSet c;
  c.n = 3;
  c.l = 4;
  c.version_chain = {be(0x24), be(0x23), be(0x22), be(0x21)};
  c.rank_seeds = {be(0x30), be(0x40), be(0x50)};
  c.rank_tails = {be(0x35), be(0x45), be(0x55)};
  return c;
}

}  // namespace

TEST_CASE("init and first update, every intermediate value pinned") {
  PrimitiveSuite s = make_test_suite();
  ChainSet c = tiny_chains();

  VeraInit init = make_vera_init(s, c, 0);
  CHECK(init.v0 == be(0x24));
  // mac keyed with V_1 over R_{1,4}: (0x23 xor 0x35) + 1
  CHECK(init.mac1 == be(0x17));

  auto st = VeraStore::from_init(s, init);
  REQUIRE(st.has_value());
  CHECK(st->vn == 0);
  CHECK(st->v == be(0x24));
  CHECK(st->next_mac == be(0x17));

  VeraInit bad = init;
  bad.vn0 = 5;
  CHECK_FALSE(VeraStore::from_init(s, bad).has_value());

  VeraDio u1 = make_vera_update(s, c, 0, 1);
  CHECK(u1.vn == 1);
  CHECK(u1.v == be(0x23));
  CHECK(u1.next_mac == be(0x68));  // (0x22 xor 0x45) + 1
  CHECK(u1.rank_elem == be(0x31));
  CHECK(st->apply_update(s, u1, c.l) == SchemeVerdict::Accept);
  CHECK(st->vn == 1);
  CHECK(st->cur_mac == be(0x17));
  CHECK(st->next_mac == be(0x68));

  // A node two hops below derives its element and anyone can check it
  // against the same anchor.
  auto elem2 = derive_rank_element(s, u1.rank_elem, 0, 2);
  REQUIRE(elem2.has_value());
  CHECK(*elem2 == be(0x33));
  CHECK(st->rank_ok(s, *elem2, 2, c.l));
  CHECK_FALSE(st->rank_ok(s, *elem2, 1, c.l));
  CHECK_FALSE(derive_rank_element(s, *elem2, 2, 2).has_value());
  CHECK_FALSE(derive_rank_element(s, *elem2, 2, 1).has_value());
}

TEST_CASE("update sequence bookkeeping and rejects") {
  PrimitiveSuite s = make_test_suite();
  ChainSet c = tiny_chains();
  auto st = VeraStore::from_init(s, make_vera_init(s, c, 0));
  REQUIRE(st.has_value());

  VeraDio u1 = make_vera_update(s, c, 0, 1);
  VeraDio u2 = make_vera_update(s, c, 0, 2);

  // A version gap leaves the rank anchor one step behind: the version
  // element itself is genuine but the rank material cannot be checked.
  CHECK(st->apply_update(s, u2, c.l) == SchemeVerdict::BadRankMac);
  CHECK(st->vn == 0);

  CHECK(st->apply_update(s, u1, c.l) == SchemeVerdict::Accept);
  CHECK(st->apply_update(s, u1, c.l) == SchemeVerdict::StaleVersion);

  VeraDio wrong_v = u2;
  wrong_v.v = be(0x99);
  CHECK(st->apply_update(s, wrong_v, c.l) == SchemeVerdict::BadVersionChain);

  VeraDio wrong_elem = u2;
  wrong_elem.rank_elem = be(0x99);
  CHECK(st->apply_update(s, wrong_elem, c.l) == SchemeVerdict::BadRankMac);

  VeraDio wrong_rank = u2;
  wrong_rank.rank = 1;  // element authenticates rank 0
  CHECK(st->apply_update(s, wrong_rank, c.l) == SchemeVerdict::BadRankMac);

  CHECK(st->apply_update(s, u2, c.l) == SchemeVerdict::Accept);

  // Final update carries no follow-up anchor.
  VeraDio u3 = make_vera_update(s, c, 0, 3);
  CHECK(u3.next_mac.empty());
  CHECK(st->apply_update(s, u3, c.l) == SchemeVerdict::Accept);
  CHECK(st->next_mac.empty());

  // Absurd version numbers fail fast instead of walking a giant chain.
  CHECK_FALSE(st->version_ok(s, 4000000000u, be(1)));
}

TEST_CASE("rank acceptance is exact over all claim pairs") {
  for (auto mk : {make_test_suite(0x5eed), make_production_suite()}) {
    PrimitiveSuite s = mk;
    std::mt19937_64 rng(77);
    ChainSet c = ChainSet::build(s, rng, 2, 8);
    auto st = VeraStore::from_init(s, make_vera_init(s, c, 10));
    REQUIRE(st.has_value());
    REQUIRE(st->apply_update(s, make_vera_update(s, c, 10, 1), c.l) ==
            SchemeVerdict::Accept);
    for (Rank j = 0; j <= 8; ++j)
      for (Rank claim = 0; claim <= 8; ++claim) {
        Bytes elem = c.rank_element(s, 1, uint32_t(j));
        CHECK(st->rank_ok(s, elem, claim, c.l) == (j == claim));
      }
  }
}

TEST_CASE("incremental and full version checks agree") {
  PrimitiveSuite s = make_test_suite();
  std::mt19937_64 rng(3);
  ChainSet c = ChainSet::build(s, rng, 6, 4);
  auto st = VeraStore::from_init(s, make_vera_init(s, c, 100));
  REQUIRE(st.has_value());
  for (uint32_t i = 1; i <= 6; ++i) {
    VeraDio u = make_vera_update(s, c, 100, i);
    bool incremental = s.hash(u.v) == st->v;
    CHECK(st->version_ok(s, u.vn, u.v) == incremental);
    REQUIRE(st->apply_update(s, u, c.l) == SchemeVerdict::Accept);
  }
}

TEST_CASE("withheld-update window admits a forged chain") {
  PrimitiveSuite s = make_test_suite();
  ChainSet c = tiny_chains();

  // Victim saw the init but is then cut off from updates 1 and 2.
  auto victim = VeraStore::from_init(s, make_vera_init(s, c, 0));
  REQUIRE(victim.has_value());

  // The forger received both updates, so it knows V_1, V_2 and its own
  // genuine rank-2 element of version 1. It invents a fresh seed and mails
  // the victim a self-made pair of updates.
  Bytes v1 = be(0x23), v2 = be(0x22);
  Bytes own_elem = be(0x33);  // genuine R_{1,2}
  Bytes forged_seed = be(0x70);
  Bytes forged_tail = hash_forward(s, forged_seed, 5);  // h^(l+1)

  VeraDio fake1{1, v1, s.mac(v2, forged_tail), own_elem, 2};
  CHECK(victim->apply_update(s, fake1, c.l) == SchemeVerdict::Accept);

  VeraDio fake2{2, v2, be(0x99), s.hash(forged_seed), 0};
  CHECK(victim->apply_update(s, fake2, c.l) == SchemeVerdict::Accept);
  // The victim now believes the forger owns rank 0 of version 2.
  CHECK(victim->rank_ok(s, s.hash(forged_seed), 0, c.l));

  // Without the blackout the same forgery bounces off the genuine anchor.
  auto fresh = VeraStore::from_init(s, make_vera_init(s, c, 0));
  REQUIRE(fresh->apply_update(s, make_vera_update(s, c, 0, 1), c.l) ==
          SchemeVerdict::Accept);
  CHECK(fresh->apply_update(s, fake2, c.l) == SchemeVerdict::BadRankMac);
}

TEST_CASE("replayed elements are bearer tokens") {
  // The mac check binds element to rank and version, not to the sender:
  // a claim built from an overheard element verifies for anyone.
  PrimitiveSuite s = make_test_suite();
  ChainSet c = tiny_chains();
  auto observer = VeraStore::from_init(s, make_vera_init(s, c, 0));
  REQUIRE(observer->apply_update(s, make_vera_update(s, c, 0, 1), c.l) ==
          SchemeVerdict::Accept);
  Bytes overheard = c.rank_element(s, 1, 1);  // some honest node's element
  CHECK(observer->rank_ok(s, overheard, 1, c.l));
}
