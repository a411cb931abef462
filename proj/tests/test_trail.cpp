#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rpltrail/trail.hpp"

using namespace rpltrail;

namespace {

constexpr uint32_t kM = 48, kK = 4;

Nonce nonce_of(NodeId x) { return 1000 + Nonce(x); }

// One collection round over the full binary tree of height 3 (nodes 0..14,
// children of i are 2i+1 and 2i+2), built honestly. Tests then tamper with
// individual mergers and rebuild the affected path.
struct Round {
  std::map<NodeId, TrailContrib> sent;
  MergeInfo mi;

  TrailContrib build(NodeId x) {
    TrailContrib c;
    c.nonce = nonce_of(x);
    if (2 * x + 1 <= 14) {
      Intake in;
      for (NodeId ch : {2 * x + 1, 2 * x + 2}) {
        in[ch] = build(ch);
        mi.merger_of[ch] = x;
      }
      mi.intake[x] = in;
      c.array = trail_merge(kM, kK, in);
    }
    sent[x] = c;
    return c;
  }

  // Re-merge from x upward after its intake was edited, then re-sign.
  TrailAttest retop(const PrimitiveSuite& s, NodeId x, VersionNo vn) {
    while (x != 0) {
      sent[x].array = trail_merge(kM, kK, mi.intake[x]);
      NodeId p = (x - 1) / 2;
      mi.intake[p][x] = sent[x];
      x = p;
    }
    return make_attest(s, vn, trail_merge(kM, kK, mi.intake[0]));
  }
};

Rank rank_of(NodeId x) {
  Rank r = 0;
  while (x != 0) {
    x = (x - 1) / 2;
    ++r;
  }
  return r;
}

TrailVerdict check(const PrimitiveSuite& s, const TrailAttest& a,
                   const Round& r, NodeId x, Rank believed = kNoRank) {
  return verify_attestation(s, a, a.vn, x,
                            believed == kNoRank ? rank_of(x) : believed,
                            nonce_of(x), r.sent.at(x), 0, r.mi);
}

}  // namespace

TEST_CASE("hop check accepts honest forwarding chains only") {
  // Initiator at rank 3, parent scribes 2; stations above hold ranks 1, 0.
  CHECK(trail_hop_ok(1, 2, 2));
  CHECK(trail_hop_ok(0, 2, 1));

  // A node two ranks deeper claims rank 1 to its child: its own parent
  // (rank 2) sees a scribe below itself.
  CHECK_FALSE(trail_hop_ok(2, 1, 1));
  // Claiming just one rank up still collides at the same station.
  CHECK_FALSE(trail_hop_ok(2, 2, 2));
  // Sender rank outside (own, scribed] is refused in both directions.
  CHECK_FALSE(trail_hop_ok(1, 3, 1));
  CHECK_FALSE(trail_hop_ok(1, 3, 4));

  CHECK(trail_down_ok(1, 2));
  CHECK_FALSE(trail_down_ok(2, 2));
}

TEST_CASE("signed rank test binds nonce, scribe and version") {
  for (auto mk : {make_test_suite(0x5eed), make_production_suite()}) {
    PrimitiveSuite s = mk;
    TrailSigned t = make_trail_signed(s, 77, 2, 5);
    CHECK(trail_signed_ok(s, t));
    TrailSigned a = t;
    a.nonce = 78;
    CHECK_FALSE(trail_signed_ok(s, a));
    TrailSigned b = t;
    b.scribed = 1;
    CHECK_FALSE(trail_signed_ok(s, b));
    TrailSigned c = t;
    c.vn = 6;
    CHECK_FALSE(trail_signed_ok(s, c));
  }
}

TEST_CASE("merge shapes grow by concatenation") {
  Round r;
  r.build(0);
  FilterArray final = trail_merge(kM, kK, r.mi.intake[0]);
  REQUIRE(final.size() == 3);
  CHECK(final.elems[0].slice_count() == 1);
  CHECK(final.elems[1].slice_count() == 2);
  CHECK(final.elems[2].slice_count() == 4);
  CHECK(final.slice_bits() == (1 + 2 + 4) * kM);
  // Leaves contribute bare nonces.
  CHECK(r.sent.at(7).array.empty());
  CHECK(r.sent.at(3).array.size() == 1);
  CHECK(r.sent.at(1).array.size() == 2);
}

TEST_CASE("honest round verifies everywhere") {
  PrimitiveSuite s = make_test_suite();
  Round r;
  r.build(0);
  TrailAttest a = make_attest(s, 4, trail_merge(kM, kK, r.mi.intake[0]));
  for (NodeId x = 1; x <= 14; ++x)
    CHECK(check(s, a, r, x) == TrailVerdict::Verified);

  TrailAttest wrong = a;
  wrong.vn = 5;
  CHECK(check(s, wrong, r, 3) == TrailVerdict::BadSignature);
  CHECK(verify_attestation(s, a, 9, 3, 2, nonce_of(3), r.sent.at(3), 0,
                           r.mi) == TrailVerdict::WrongVersion);

  TrailAttest flipped = a;
  flipped.array.elems[1].slices[0].set_bit(0);
  CHECK(check(s, flipped, r, 3) == TrailVerdict::BadSignature);
}

TEST_CASE("a dropped contribution surfaces as a missing nonce") {
  PrimitiveSuite s = make_test_suite();
  Round r;
  r.build(0);
  r.mi.intake[5].erase(11);
  r.mi.merger_of.erase(11);
  TrailAttest a = r.retop(s, 5, 4);
  CHECK(check(s, a, r, 11) == TrailVerdict::NonceMissing);
  for (NodeId x : {1, 2, 3, 4, 5, 6, 12, 13, 14})
    CHECK(check(s, a, r, x) == TrailVerdict::Verified);
}

TEST_CASE("a demoted nonce lands at the wrong element") {
  PrimitiveSuite s = make_test_suite();
  Round r;
  r.build(0);
  // Node 5 repackages child 11 as if it were a grandchild: the nonce moves
  // one element deeper instead of sitting in 5's first element.
  TrailContrib fake;
  fake.has_nonce = false;
  BloomFilter b(kM, kK);
  b.insert(nonce_of(11));
  fake.array.elems.resize(1);
  fake.array.elems[0].slices.push_back(b);
  r.mi.intake[5][11] = fake;
  TrailAttest a = r.retop(s, 5, 4);
  CHECK(check(s, a, r, 11) == TrailVerdict::NonceMissing);
  CHECK(check(s, a, r, 12) == TrailVerdict::Verified);
}

TEST_CASE("reordered sibling blocks break the aligned comparison") {
  PrimitiveSuite s = make_test_suite();
  Round r;
  r.build(0);
  // Node 1 swaps its children's level-1 blocks when assembling element 2.
  r.sent[1].array = trail_merge(kM, kK, r.mi.intake[1]);
  std::swap(r.sent[1].array.elems[1].slices[0],
            r.sent[1].array.elems[1].slices[1]);
  r.mi.intake[0][1] = r.sent[1];
  TrailAttest a = make_attest(s, 4, trail_merge(kM, kK, r.mi.intake[0]));

  // Both reordered children notice; their own children are inside the
  // swapped slices and still find their nonces by element, so they pass.
  CHECK(check(s, a, r, 3) == TrailVerdict::ArrayShrunk);
  CHECK(check(s, a, r, 4) == TrailVerdict::ArrayShrunk);
  for (NodeId x : {2, 7, 8, 9, 10})
    CHECK(check(s, a, r, x) == TrailVerdict::Verified);
}

TEST_CASE("withheld nonce excludes only its owner") {
  PrimitiveSuite s = make_test_suite();
  Round r;
  r.build(0);
  r.sent[5].has_nonce = false;
  r.mi.intake[2][5] = r.sent[5];
  TrailAttest a = r.retop(s, 2, 4);
  CHECK(check(s, a, r, 5) == TrailVerdict::NonceMissing);
  for (NodeId x : {1, 2, 6, 11, 12})
    CHECK(check(s, a, r, x) == TrailVerdict::Verified);
}

TEST_CASE("a deleted nonce is noticed by its owner alone") {
  PrimitiveSuite s = make_test_suite();
  Round r;
  r.build(0);
  // Node 1 carries child 3's whole subtree but scrubs 3's own nonce.
  r.mi.intake[1][3].has_nonce = false;
  TrailAttest a = r.retop(s, 1, 4);
  CHECK(check(s, a, r, 3) == TrailVerdict::NonceMissing);
  for (NodeId x : {1, 4, 7, 8, 9, 10})
    CHECK(check(s, a, r, x) == TrailVerdict::Verified);
}

TEST_CASE("merging on a sibling's behalf displaces its nonce") {
  PrimitiveSuite s = make_test_suite();
  Round r;
  r.build(0);
  // Node 4 takes over sibling 3's contribution: 3's data now enters the
  // array one level deeper than 3's rank says it should.
  TrailContrib three = r.mi.intake[1][3];
  r.mi.intake[1].erase(3);
  r.mi.intake[4][3] = three;
  r.mi.merger_of[3] = 4;
  TrailAttest a = r.retop(s, 4, 4);
  CHECK(check(s, a, r, 3) == TrailVerdict::NonceMissing);
  // 3's children sit one level too deep as well.
  CHECK(check(s, a, r, 7) == TrailVerdict::NonceMissing);
  CHECK(check(s, a, r, 8) == TrailVerdict::NonceMissing);
  for (NodeId x : {2, 9, 10})
    CHECK(check(s, a, r, x) == TrailVerdict::Verified);
}

TEST_CASE("two stacked colluders lift a subtree unnoticed") {
  PrimitiveSuite s = make_test_suite();
  Round r;
  r.build(0);
  // Node 3 (under node 1) vanishes from the round: it withholds its own
  // nonce and hands its children's raw contributions to node 1, which
  // merges them as direct children. 7 and 8 were told their parent holds
  // rank 1, so they believe they are at rank 2.
  TrailContrib c7 = r.sent[7], c8 = r.sent[8];
  r.mi.intake[1].erase(3);
  r.mi.intake[1][7] = c7;
  r.mi.intake[1][8] = c8;
  r.mi.merger_of[7] = 1;
  r.mi.merger_of[8] = 1;
  r.mi.merger_of.erase(3);
  r.mi.intake.erase(3);
  TrailAttest a = r.retop(s, 1, 4);

  // Every honest participant checks out, including the lifted ones.
  CHECK(check(s, a, r, 7, 2) == TrailVerdict::Verified);
  CHECK(check(s, a, r, 8, 2) == TrailVerdict::Verified);
  for (NodeId x : {1, 2, 4, 5, 6, 9, 10, 11, 12, 13, 14})
    CHECK(check(s, a, r, x) == TrailVerdict::Verified);
  // Yet the attested position is one rank shallower than the truth.
  CHECK(rank_of(7) == 3);
}

TEST_CASE("block location walks the merge registry") {
  Round r;
  r.build(0);
  auto loc = locate_block(5, 1, 0, r.mi);
  REQUIRE(loc.has_value());
  CHECK(loc->first == 3);   // 5's first element lands in the third
  CHECK(loc->second == 2);  // after 3's and 4's level-1 blocks
  CHECK(locate_block(1, 2, 0, r.mi) == std::make_pair(size_t(3), size_t(0)));
  CHECK(locate_block(2, 1, 0, r.mi) == std::make_pair(size_t(2), size_t(1)));

  r.mi.merger_of.erase(5);
  CHECK_FALSE(locate_block(5, 1, 0, r.mi).has_value());

  // A merge cycle cannot send the walk into an endless loop.
  MergeInfo loop;
  loop.merger_of = {{1, 2}, {2, 1}};
  loop.intake[1][2] = TrailContrib{};
  loop.intake[2][1] = TrailContrib{};
  CHECK_FALSE(locate_block(1, 1, 0, loop).has_value());
}

TEST_CASE("size predictions match the closed forms") {
  struct Row {
    uint32_t k, h;
    unsigned long long nodes;
    double max, avg;
  };
  const Row rows[] = {
      {2, 3, 15, 10.5, 3.5},   {2, 4, 31, 22.5, 7.5},
      {2, 5, 63, 46.5, 15.5},  {4, 3, 85, 63.0, 12.6},
      {4, 4, 341, 255.0, 51.0}, {4, 5, 1365, 1023.0, 204.6},
  };
  for (const Row& row : rows) {
    auto p = predicted_sizes(row.k, row.h);
    REQUIRE(p.has_value());
    CHECK(p->nodes == row.nodes);
    CHECK(p->max_bytes == doctest::Approx(row.max).epsilon(1e-12));
    CHECK(p->avg_bytes == doctest::Approx(row.avg).epsilon(1e-12));
    CHECK(p->per_depth_up_bytes[0] == p->max_bytes);
    CHECK(p->per_depth_up_bytes[row.h] == 0.0);
    for (uint32_t d = 1; d <= row.h; ++d)
      CHECK(p->per_depth_up_bytes[d] < p->per_depth_up_bytes[d - 1]);
    // Upward payload from depth d equals the subtree slice count.
    double slices = (std::pow(double(row.k), double(row.h - 1)) - 1.0) /
                    (row.k - 1.0);
    CHECK(p->per_depth_up_bytes[1] ==
          doctest::Approx(p->slice_bytes * slices).epsilon(1e-12));
  }
  CHECK_FALSE(predicted_sizes(1, 3).has_value());
  CHECK_FALSE(predicted_sizes(2, 0).has_value());
  CHECK_FALSE(predicted_sizes(4000000000u, 40).has_value());
}
