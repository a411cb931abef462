#pragma once

#include <memory>
#include <optional>
#include <set>

#include "rpltrail/dodag.hpp"
#include "rpltrail/simnet.hpp"
#include "rpltrail/trail.hpp"
#include "rpltrail/vera_plus.hpp"

namespace rpltrail {

enum class Scheme { Rpl, Vera, VeraPlus, TrailSingle, Trail };

std::optional<Scheme> scheme_from_string(const std::string& s);
const char* to_string(Scheme s);

struct ProtocolConfig {
  Scheme scheme = Scheme::Rpl;
  bool challenge_response = false;
  Rank l = 16;            // deepest authenticatable rank
  uint32_t versions = 3;  // updates issued after the bootstrap epoch
  VersionNo vn0 = 0;
  uint32_t bloom_m = 24;
  uint32_t bloom_k = 4;
};

// Material and bookkeeping shared by every node of one run: the root's
// chain set, and the observable merge structure of the current collection
// round (rebuilt from scratch each round).
struct Shared {
  PrimitiveSuite suite;
  ProtocolConfig cfg;
  ChainSet chains;
  MergeInfo registry;
};

// Phase spacing. One version update settles well within a phase: the rank
// flood needs diameter ticks, registration and announcements a few more,
// and the challenge pipeline at most kChallengeWait + kAdjudicateWait plus
// routing.
constexpr uint64_t kPhaseGap = 300;
constexpr uint64_t kCollectWait = 128;      // contribution backstop timer
constexpr uint64_t kRootCollectWait = 160;  // root assembles after this
constexpr uint64_t kContribStep = 8;        // deeper nodes fire earlier
constexpr uint64_t kContribGrace = 16;      // one extra wait on missing children
constexpr uint64_t kChallengeWait = 16;
constexpr uint64_t kChallengeQuiet = 60;  // settle time before audits start
constexpr uint64_t kAdjudicateWait = 32;
constexpr uint64_t kProbeDelay = 150;
constexpr uint64_t kTestDelay = 40;
constexpr uint64_t kTestWait = 64;
constexpr uint64_t kAttackDelay = 80;

// Timer tags: high bits select the action, low bits carry a node id where
// one is needed.
enum TimerKind : int {
  kTimBootstrap = 1,
  kTimVersionStep,
  kTimContrib,
  kTimProbe,
  kTimInitTest,
  kTimTestExpire,
  kTimAttack,
  kTimChallenge,   // | suspect id
  kTimAdjudicate,  // | suspect id
};
constexpr int timer_tag(TimerKind k, NodeId id = 0) {
  return (int(k) << 16) | int(id & 0xffff);
}

class ProtocolNode : public Node {
 public:
  ProtocolNode(NodeId id, std::shared_ptr<Shared> sh);

  void on_message(World& w, NodeId from, const Message& m) override;
  void on_timer(World& w, int tag) override;

  const NodeState& state() const { return st_; }

 protected:
  // --- attack surface: honest defaults, overridden by adversaries ---

  // Rank claimed in outgoing advertisements, announcements, scribes and
  // forwarded datagrams.
  virtual Rank advertised_rank() const { return st_.rank; }
  virtual Bytes advertised_elem() const { return own_elem_; }
  // Suppress own advertisement relays for this version entirely.
  virtual bool withhold_version(VersionNo) const { return false; }
  // Runs after a version was adopted and announced; attack trigger point.
  virtual void after_version_adopt(World&) {}
  virtual void on_challenge(World& w, NodeId from, const Challenge& c);
  // Convergecast shaping: first the intake (before the merge is computed
  // and recorded), then the outgoing contribution itself.
  virtual void shape_intake(World&) {}
  virtual TrailContrib shape_contribution(World&, TrailContrib c) {
    return c;
  }
  virtual bool skip_hop_checks() const { return false; }
  virtual bool accept_legitimation() const { return true; }
  virtual void send_contribution_upward(World& w);
  virtual void on_colluder_relay(World&, NodeId, const ColluderRelay&) {}
  virtual void on_attack_timer(World&) {}

  // --- honest machinery ---

  bool is_root() const { return st_.is_root; }
  const ProtocolConfig& cfg() const { return sh_->cfg; }
  const PrimitiveSuite& suite() const { return sh_->suite; }

  void bootstrap(World& w);
  void issue_update(World& w);
  void adopt_version(World& w, VersionNo vn);
  void learn_neighbor(World& w, NodeId nbr, Rank rank, const Bytes& elem);
  void reselect_and_advertise(World& w);
  void advertise(World& w);
  void send_dao(World& w);
  std::vector<NodeId> subtree() const;
  void route_up(World& w, const Message& m);
  bool route_toward(World& w, NodeId target, const Message& m);

  void handle_dio_plain(World& w, NodeId from, const DioPlain& d);
  void handle_vera_init(World& w, NodeId from, const VeraInit& m);
  void handle_vpp_init(World& w, NodeId from, const VppInit& m);
  void handle_vera_dio(World& w, NodeId from, const VeraDio& d);
  void handle_vpp_dio(World& w, NodeId from, const VppDio& d);
  void handle_dao(World& w, NodeId from, const Dao& d);
  void handle_announce(World& w, NodeId from, const RankAnnounce& a);
  void handle_datagram(World& w, NodeId from, const Datagram& d);
  void handle_response(World& w, NodeId from, const ChallengeResponse& r);
  void handle_solved(World& w, NodeId from, const SolvedNotice& sn);
  void handle_failure(World& w, NodeId from, const FailureNotice& fn);
  void handle_report(World& w, NodeId from, const ValidationReport& vr);
  void handle_legitimation(World& w, NodeId from, const Legitimation& lg);
  void start_flood(World& w, Legitimation lg);
  void isolate(World& w, NodeId accused);

  void start_trail_round(World& w);
  void handle_contrib(World& w, NodeId from, const TrailContrib& c);
  void maybe_complete_round(World& w);
  void handle_attest(World& w, NodeId from, const TrailAttest& a);
  void handle_trail_test(World& w, NodeId from, TrailTest t);
  void handle_trail_signed(World& w, NodeId from, const TrailSigned& t);

  NodeId id_;
  std::shared_ptr<Shared> sh_;
  NodeState st_;

  std::optional<VeraStore> vera_;
  std::optional<VppStore> vpp_;
  Bytes own_elem_;
  Bytes relay_key_;                  // key cipher of the accepted update
  std::map<NodeId, Bytes> nbr_elems_;  // verified elements, current version
  Rank last_sent_rank_ = kNoRank;    // advertisement dampening
  bool booted_ = false;              // ran adopt_version at least once
  bool init_relayed_ = false;
  std::vector<NodeId> last_dao_;
  NodeId last_dao_parent_ = kNoNode;
  uint32_t issued_ = 0;   // root: updates sent so far
  uint64_t adopt_t_ = 0;  // when the current version was adopted

  // challenge-response
  struct OpenChallenge {
    uint64_t nonce = 0;
    Rank claimed = kNoRank;
    bool done = false;
  };
  std::map<NodeId, OpenChallenge> chall_out_;
  std::set<NodeId> challenged_;  // per version
  std::map<NodeId, FailureNotice> cases_;  // root: open accusations
  std::set<NodeId> vouched_;               // root: reviewed solutions
  std::set<NodeId> adjudicated_;
  std::set<NodeId> isolations_seen_;

  // convergecast round
  Intake intake_;
  std::set<NodeId> accounted_;
  Nonce my_nonce_ = 0;
  TrailContrib sent_contrib_;
  bool contrib_sent_ = false;
  bool attest_done_ = false;
  bool round_timer_set_ = false;
  bool contrib_grace_used_ = false;

  bool children_all_accounted() const;

  // single-path tests
  std::map<Nonce, NodeId> reverse_;
  std::set<Nonce> scribed_here_;  // tests this node wrote the rank into
  struct OpenTest {
    Nonce nonce = 0;
    Rank expect = kNoRank;
    bool open = false;
  };
  OpenTest test_;
  std::pair<NodeId, Rank> last_test_sched_{kNoNode, kNoRank};
};

}  // namespace rpltrail
