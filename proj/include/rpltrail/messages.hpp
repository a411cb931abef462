#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "rpltrail/bloom.hpp"
#include "rpltrail/bytes.hpp"
#include "rpltrail/graph.hpp"

namespace rpltrail {

using Rank = int32_t;
constexpr Rank kNoRank = -1;
using VersionNo = uint32_t;

// --- topology maintenance ---

struct DioPlain {  // rank advertisement without authentication material
  VersionNo vn = 0;
  Rank rank = 0;
};

struct Dao {  // hop-by-hop child registration, storing mode
  bool registering = true;
  std::vector<NodeId> subtree;  // sender plus everything registered below it
};

struct Dis {  // request: target shall announce its rank
  NodeId target = kNoNode;
};

struct RankAnnounce {  // binding rank claim, also used as local repair signal
  Rank rank = 0;
};

struct Datagram {
  NodeId src = kNoNode, dst = kNoNode;
  bool upward = true;
  Rank sender_rank = kNoRank;  // stamped by each forwarder
};

// --- version chain authentication ---

struct VeraInit {
  Bytes v0;
  VersionNo vn0 = 0;
  Bytes mac1;  // mac keyed with V_1 over the first rank chain tail
  Bytes sig;
};

struct VeraDio {
  VersionNo vn = 0;
  Bytes v;         // V_vn
  Bytes next_mac;  // mac keyed with V_{vn+1} over R_{vn+1,l}
  Bytes rank_elem;
  Rank rank = 0;
};

struct VppInit {
  Bytes v0;
  VersionNo vn0 = 0;
  Bytes c1;  // encryption chain head, anchor for the first update
  Bytes cn;  // final tail in clear, anchor for the last update
  Bytes sig;
};

struct VppDio {
  VersionNo vn = 0;
  Bytes v;
  Bytes key_cipher;  // c_{vn+1}, unlocks the anchored cipher of this update
  Bytes rank_elem;
  Rank rank = 0;
};

// --- challenge-response and isolation ---

struct Challenge {
  uint64_t nonce = 0;
};

struct ChallengeResponse {
  Bytes cipher;
};

struct SolvedNotice {  // suspect hands its solution to a parent for review
  NodeId challenger = kNoNode;
  uint64_t nonce = 0;
  Bytes cipher;
  Rank claimed = kNoRank;
};

struct ValidationReport {  // routed up to the root
  NodeId suspect = kNoNode;
  NodeId reporter = kNoNode;
};

struct FailureNotice {  // routed up to the root
  NodeId challenger = kNoNode;
  NodeId suspect = kNoNode;
  Rank challenger_rank = kNoRank;
  Rank suspect_claimed = kNoRank;
};

struct Legitimation {
  Rank challenger_rank = kNoRank;
  Rank suspect_rank = kNoRank;
  NodeId accused = kNoNode;
  Bytes sig;
  int32_t hop_limit = 2;
  bool flood = false;  // false while routed toward the accused's parent
};

// --- path validation ---

struct TrailTest {  // upward rank test
  Nonce nonce = 0;
  Rank scribed = kNoRank;  // written once by the initiator's parent
  Rank sender_rank = kNoRank;
  NodeId initiator = kNoNode;
};

struct TrailSigned {  // signed test on its way back down
  Nonce nonce = 0;
  Rank scribed = kNoRank;
  VersionNo vn = 0;
  Bytes sig;
};

struct TrailContrib {  // convergecast: own nonce plus merged child data
  bool has_nonce = true;
  Nonce nonce = 0;
  FilterArray array;
};

struct TrailAttest {  // signed filter array, multicast down
  VersionNo vn = 0;
  FilterArray array;
  Bytes sig;
};

// Adjacent colluders sharing raw contributions in band. Not part of any
// honest protocol; exists so collusion never needs out-of-band state.
struct ColluderRelay {
  std::vector<std::pair<NodeId, TrailContrib>> contribs;
};

using Message =
    std::variant<DioPlain, Dao, Dis, RankAnnounce, Datagram, VeraInit, VeraDio,
                 VppInit, VppDio, Challenge, ChallengeResponse, SolvedNotice,
                 ValidationReport, FailureNotice, Legitimation, TrailTest,
                 TrailSigned, TrailContrib, TrailAttest, ColluderRelay>;

// Stable name used in event logs.
const char* kind_of(const Message& m);

// Model payload size in bytes. Filter-carrying messages count their packed
// slice bits only (bit count / 8, possibly fractional); everything else uses
// fixed field sizes with elem_w-byte chain elements and sig_w-byte
// signatures.
double wire_bytes(const Message& m, size_t elem_w, size_t sig_w);

}  // namespace rpltrail
