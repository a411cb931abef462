#include "rpltrail/node.hpp"

#include <algorithm>

namespace rpltrail {

std::optional<Scheme> scheme_from_string(const std::string& s) {
  if (s == "rpl") return Scheme::Rpl;
  if (s == "vera") return Scheme::Vera;
  if (s == "vera++") return Scheme::VeraPlus;
  if (s == "trail-single") return Scheme::TrailSingle;
  if (s == "trail") return Scheme::Trail;
  return std::nullopt;
}

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::Rpl: return "rpl";
    case Scheme::Vera: return "vera";
    case Scheme::VeraPlus: return "vera++";
    case Scheme::TrailSingle: return "trail-single";
    case Scheme::Trail: return "trail";
  }
  return "?";
}

ProtocolNode::ProtocolNode(NodeId id, std::shared_ptr<Shared> sh)
    : id_(id), sh_(std::move(sh)) {
  st_.id = id;
  st_.is_root = (id == 0);
}

// ---------------------------------------------------------------- dispatch

void ProtocolNode::on_message(World& w, NodeId from, const Message& m) {
  if (auto* d = std::get_if<DioPlain>(&m)) return handle_dio_plain(w, from, *d);
  if (auto* d = std::get_if<VeraInit>(&m)) return handle_vera_init(w, from, *d);
  if (auto* d = std::get_if<VppInit>(&m)) return handle_vpp_init(w, from, *d);
  if (auto* d = std::get_if<VeraDio>(&m)) return handle_vera_dio(w, from, *d);
  if (auto* d = std::get_if<VppDio>(&m)) return handle_vpp_dio(w, from, *d);
  if (auto* d = std::get_if<Dao>(&m)) return handle_dao(w, from, *d);
  if (auto* d = std::get_if<RankAnnounce>(&m))
    return handle_announce(w, from, *d);
  if (auto* d = std::get_if<Datagram>(&m)) return handle_datagram(w, from, *d);
  if (auto* d = std::get_if<Challenge>(&m)) return on_challenge(w, from, *d);
  if (auto* d = std::get_if<ChallengeResponse>(&m))
    return handle_response(w, from, *d);
  if (auto* d = std::get_if<SolvedNotice>(&m)) return handle_solved(w, from, *d);
  if (auto* d = std::get_if<FailureNotice>(&m))
    return handle_failure(w, from, *d);
  if (auto* d = std::get_if<ValidationReport>(&m))
    return handle_report(w, from, *d);
  if (auto* d = std::get_if<Legitimation>(&m))
    return handle_legitimation(w, from, *d);
  if (auto* d = std::get_if<TrailContrib>(&m)) return handle_contrib(w, from, *d);
  if (auto* d = std::get_if<TrailAttest>(&m)) return handle_attest(w, from, *d);
  if (auto* d = std::get_if<TrailTest>(&m)) return handle_trail_test(w, from, *d);
  if (auto* d = std::get_if<TrailSigned>(&m))
    return handle_trail_signed(w, from, *d);
  if (auto* d = std::get_if<ColluderRelay>(&m))
    return on_colluder_relay(w, from, *d);
}

void ProtocolNode::on_timer(World& w, int tag) {
  auto kind = TimerKind(tag >> 16);
  NodeId arg = NodeId(tag & 0xffff);
  switch (kind) {
    case kTimBootstrap:
      bootstrap(w);
      break;
    case kTimVersionStep:
      issue_update(w);
      break;
    case kTimContrib:
      // A straggling child gets one grace period before the round closes
      // without it; completeness usually short-circuits long before this.
      if (cfg().scheme == Scheme::Trail && !contrib_sent_ &&
          !contrib_grace_used_ && !children_all_accounted()) {
        contrib_grace_used_ = true;
        w.set_timer(id_, kContribGrace, timer_tag(kTimContrib));
        break;
      }
      send_contribution_upward(w);
      break;
    case kTimProbe: {
      if (st_.is_root || !st_.attached()) break;
      Datagram d{id_, 0, true, advertised_rank()};
      w.send(id_, st_.preferred_parent, d);
      break;
    }
    case kTimInitTest: {
      if (cfg().scheme != Scheme::TrailSingle || st_.is_root ||
          !st_.attached())
        break;
      auto pr = st_.neighbor_ranks.find(st_.preferred_parent);
      if (pr == st_.neighbor_ranks.end()) break;
      if (test_.open) {  // one in flight; re-check once it resolves
        w.set_timer(id_, kTestDelay, timer_tag(kTimInitTest));
        break;
      }
      test_.nonce = w.rng()();
      test_.expect = pr->second;
      test_.open = true;
      w.send(id_, st_.preferred_parent,
             TrailTest{test_.nonce, kNoRank, advertised_rank(), id_});
      w.set_timer(id_, kTestWait, timer_tag(kTimTestExpire));
      break;
    }
    case kTimTestExpire: {
      if (!test_.open) break;
      test_.open = false;
      w.note(id_, "trail_verdict",
             {{"result", "timeout"}, {"vn", st_.version}});
      if (st_.preferred_parent != kNoNode) {
        st_.blocked.insert(st_.preferred_parent);
        st_.neighbor_ranks.erase(st_.preferred_parent);
        nbr_elems_.erase(st_.preferred_parent);
        st_.preferred_parent = kNoNode;
        reselect_and_advertise(w);
      }
      break;
    }
    case kTimChallenge: {
      auto it = chall_out_.find(arg);
      if (it == chall_out_.end() || it->second.done) break;
      it->second.done = true;
      w.note(id_, "challenge_fail",
             {{"suspect", arg}, {"claimed", it->second.claimed}});
      route_up(w, FailureNotice{id_, arg, st_.rank, it->second.claimed});
      break;
    }
    case kTimAdjudicate: {
      if (!st_.is_root || adjudicated_.count(arg)) break;
      adjudicated_.insert(arg);
      auto c = cases_.find(arg);
      bool notice = c != cases_.end();
      Adjudication verdict = adjudicate(notice, vouched_.count(arg) > 0);
      w.note(id_, "adjudicate",
             {{"suspect", arg},
              {"challenger", notice ? c->second.challenger : kNoNode},
              {"verdict", to_string(verdict)}});
      if (verdict != Adjudication::SuspectMalicious) break;
      Legitimation lg = make_legitimation(suite(), c->second.challenger_rank,
                                          c->second.suspect_claimed, arg);
      if (st_.children.count(arg))
        start_flood(w, lg);
      else if (!route_toward(w, arg, lg))
        w.note(id_, "route_miss", {{"target", arg}});
      break;
    }
    case kTimAttack:
      on_attack_timer(w);
      break;
  }
}

// ------------------------------------------------------------ root driving

void ProtocolNode::bootstrap(World& w) {
  adopt_version(w, cfg().vn0);
  if (cfg().scheme == Scheme::Vera)
    w.multicast(id_, make_vera_init(suite(), sh_->chains, cfg().vn0));
  if (cfg().scheme == Scheme::VeraPlus)
    w.multicast(id_, make_vpp_init(suite(), sh_->chains, cfg().vn0));
  w.note(id_, "adopt",
         {{"vn", st_.version}, {"rank", 0}, {"parent", kNoNode}});
  w.multicast(id_, DioPlain{st_.version, 0});
  w.multicast(id_, RankAnnounce{0});
  last_sent_rank_ = 0;
  if (cfg().versions > 0)
    w.set_timer(id_, kPhaseGap, timer_tag(kTimVersionStep));
}

void ProtocolNode::issue_update(World& w) {
  issued_ += 1;
  VersionNo vn = cfg().vn0 + issued_;
  adopt_version(w, vn);
  own_elem_ = sh_->chains.rank_element(suite(), issued_, 0);
  Message dio;
  switch (cfg().scheme) {
    case Scheme::Vera:
      dio = make_vera_update(suite(), sh_->chains, cfg().vn0, issued_);
      break;
    case Scheme::VeraPlus: {
      VppDio u = make_vpp_update(suite(), sh_->chains, cfg().vn0, issued_);
      relay_key_ = u.key_cipher;
      dio = u;
      break;
    }
    default:
      dio = DioPlain{vn, 0};
      break;
  }
  w.note(id_, "adopt", {{"vn", vn}, {"rank", 0}, {"parent", kNoNode}});
  w.multicast(id_, std::move(dio));
  w.multicast(id_, RankAnnounce{0});
  last_sent_rank_ = 0;
  if (issued_ < cfg().versions)
    w.set_timer(id_, kPhaseGap, timer_tag(kTimVersionStep));
}

// ------------------------------------------------------- version handling

void ProtocolNode::adopt_version(World& w, VersionNo vn) {
  booted_ = true;
  st_.version = vn;
  adopt_t_ = w.now();
  st_.neighbor_ranks.clear();
  st_.announced_ranks.clear();
  st_.parent_set.clear();
  nbr_elems_.clear();
  last_sent_rank_ = kNoRank;
  challenged_.clear();
  chall_out_.clear();
  if (!st_.is_root) {
    st_.preferred_parent = kNoNode;
    st_.rank = kNoRank;
    own_elem_.clear();
  } else {
    st_.rank = 0;
  }
  w.note(id_, "version", {{"vn", vn}, {"issued", st_.is_root}});

  // fresh collection round / path test state
  intake_.clear();
  accounted_.clear();
  contrib_sent_ = false;
  attest_done_ = false;
  round_timer_set_ = false;
  contrib_grace_used_ = false;
  sent_contrib_ = TrailContrib{};
  reverse_.clear();
  scribed_here_.clear();
  test_ = OpenTest{};
  if (cfg().scheme == Scheme::Trail) {
    my_nonce_ = w.rng()();
    if (st_.is_root) {
      sh_->registry = MergeInfo{};
      w.set_timer(id_, kRootCollectWait, timer_tag(kTimContrib));
    }
  }
  last_test_sched_ = {kNoNode, kNoRank};
  if (!st_.is_root) w.set_timer(id_, kProbeDelay, timer_tag(kTimProbe));
}

void ProtocolNode::learn_neighbor(World& w, NodeId nbr, Rank rank,
                                  const Bytes& elem) {
  (void)w;
  if (st_.blocked.count(nbr)) return;
  st_.neighbor_ranks[nbr] = rank;
  if (!elem.empty()) nbr_elems_[nbr] = elem;
}

void ProtocolNode::reselect_and_advertise(World& w) {
  Rank old_rank = st_.rank;
  NodeId old_parent = st_.preferred_parent;
  bool ok = st_.reselect();
  if (!ok && !st_.is_root) {
    if (old_rank != kNoRank) w.note(id_, "detach", Json::object());
    own_elem_.clear();
    return;
  }
  bool moved = st_.rank != old_rank || st_.preferred_parent != old_parent;
  if (!st_.is_root && st_.version > cfg().vn0 &&
      (cfg().scheme == Scheme::Vera || cfg().scheme == Scheme::VeraPlus)) {
    own_elem_.clear();
    auto pe = nbr_elems_.find(st_.preferred_parent);
    auto pr = st_.neighbor_ranks.find(st_.preferred_parent);
    if (pe != nbr_elems_.end() && pr != st_.neighbor_ranks.end()) {
      auto d = derive_rank_element(suite(), pe->second, pr->second, st_.rank);
      if (d) own_elem_ = *d;
    }
  }
  if (moved) {
    w.note(id_, "adopt", {{"vn", st_.version},
                          {"rank", st_.rank},
                          {"parent", st_.preferred_parent}});
    if (old_parent != kNoNode && old_parent != st_.preferred_parent)
      w.send(id_, old_parent, Dao{false, {}});
  }
  advertise(w);
  send_dao(w);
  if (cfg().scheme == Scheme::Trail && !st_.is_root && !round_timer_set_ &&
      st_.attached()) {
    round_timer_set_ = true;
    uint64_t depth = uint64_t(std::clamp<Rank>(st_.rank, 1, 14));
    w.set_timer(id_, kCollectWait - kContribStep * depth,
                timer_tag(kTimContrib));
  }
  // Every (re)selection of a parent or change in its claimed rank gets its
  // own path test; a parent whose story never changes is tested once.
  if (cfg().scheme == Scheme::TrailSingle && !st_.is_root && st_.attached()) {
    auto pr = st_.neighbor_ranks.find(st_.preferred_parent);
    if (pr != st_.neighbor_ranks.end()) {
      std::pair<NodeId, Rank> tuple{st_.preferred_parent, pr->second};
      if (tuple != last_test_sched_) {
        last_test_sched_ = tuple;
        w.set_timer(id_, kTestDelay, timer_tag(kTimInitTest));
      }
    }
  }
}

void ProtocolNode::advertise(World& w) {
  if (!st_.attached() || st_.is_root) return;
  if (withhold_version(st_.version)) return;
  Rank adv = advertised_rank();
  if (adv == last_sent_rank_) return;
  last_sent_rank_ = adv;
  Message dio;
  if (cfg().scheme == Scheme::Vera && st_.version > cfg().vn0 && vera_)
    dio = VeraDio{st_.version, vera_->v, vera_->next_mac, advertised_elem(),
                  adv};
  else if (cfg().scheme == Scheme::VeraPlus && st_.version > cfg().vn0 && vpp_)
    dio = VppDio{st_.version, vpp_->v, relay_key_, advertised_elem(), adv};
  else
    dio = DioPlain{st_.version, adv};
  w.multicast(id_, std::move(dio));
  w.multicast(id_, RankAnnounce{adv});
}

std::vector<NodeId> ProtocolNode::subtree() const {
  std::set<NodeId> all{id_};
  for (const auto& [c, sub] : st_.routes) all.insert(sub.begin(), sub.end());
  return {all.begin(), all.end()};
}

void ProtocolNode::send_dao(World& w) {
  if (st_.is_root || !st_.attached()) return;
  auto sub = subtree();
  if (sub == last_dao_ && st_.preferred_parent == last_dao_parent_) return;
  last_dao_ = sub;
  last_dao_parent_ = st_.preferred_parent;
  w.send(id_, st_.preferred_parent, Dao{true, std::move(sub)});
}

void ProtocolNode::route_up(World& w, const Message& m) {
  if (st_.is_root) {
    on_message(w, id_, m);
    return;
  }
  if (st_.attached()) w.send(id_, st_.preferred_parent, m);
}

bool ProtocolNode::route_toward(World& w, NodeId target, const Message& m) {
  if (st_.children.count(target)) {
    w.send(id_, target, m);
    return true;
  }
  for (const auto& [c, sub] : st_.routes)
    if (sub.count(target)) {
      w.send(id_, c, m);
      return true;
    }
  return false;
}

// --------------------------------------------------------------- messages

void ProtocolNode::handle_dio_plain(World& w, NodeId from, const DioPlain& d) {
  if (st_.is_root || st_.blocked.count(from)) return;
  bool chain_scheme =
      cfg().scheme == Scheme::Vera || cfg().scheme == Scheme::VeraPlus;
  if (chain_scheme) {
    // Plain advertisements only carry weight during the bootstrap epoch;
    // afterwards a version bump needs chain material behind it.
    if (d.vn == cfg().vn0 && st_.version == cfg().vn0) {
      if (!booted_) adopt_version(w, cfg().vn0);
      learn_neighbor(w, from, d.rank, {});
      reselect_and_advertise(w);
    } else if (d.vn > st_.version) {
      w.note(id_, "reject", {{"reason", "unauthenticated_version"},
                             {"from", from},
                             {"vn", d.vn}});
    }
    return;
  }
  if (d.vn > st_.version) {
    adopt_version(w, d.vn);
    learn_neighbor(w, from, d.rank, {});
    reselect_and_advertise(w);
    after_version_adopt(w);
  } else if (d.vn == st_.version) {
    if (!booted_) adopt_version(w, cfg().vn0);
    learn_neighbor(w, from, d.rank, {});
    reselect_and_advertise(w);
  }
}

void ProtocolNode::handle_vera_init(World& w, NodeId from, const VeraInit& m) {
  if (cfg().scheme != Scheme::Vera || st_.is_root) return;
  if (!vera_) {
    auto s = VeraStore::from_init(suite(), m);
    if (!s) {
      w.note(id_, "reject", {{"reason", "bad_signature"}, {"from", from}});
      return;
    }
    vera_ = *s;
  }
  if (!init_relayed_) {
    init_relayed_ = true;
    w.multicast(id_, m);
  }
}

void ProtocolNode::handle_vpp_init(World& w, NodeId from, const VppInit& m) {
  if (cfg().scheme != Scheme::VeraPlus || st_.is_root) return;
  if (!vpp_) {
    auto s = VppStore::from_init(suite(), m);
    if (!s) {
      w.note(id_, "reject", {{"reason", "bad_signature"}, {"from", from}});
      return;
    }
    vpp_ = *s;
  }
  if (!init_relayed_) {
    init_relayed_ = true;
    w.multicast(id_, m);
  }
}

void ProtocolNode::handle_vera_dio(World& w, NodeId from, const VeraDio& d) {
  if (cfg().scheme != Scheme::Vera || st_.is_root) return;
  if (st_.blocked.count(from) || !vera_) return;
  if (d.vn > st_.version) {
    VeraStore trial = *vera_;
    SchemeVerdict v = trial.apply_update(suite(), d, cfg().l);
    if (v != SchemeVerdict::Accept) {
      w.note(id_, "reject",
             {{"reason", to_string(v)}, {"from", from}, {"vn", d.vn}});
      return;
    }
    vera_ = std::move(trial);
    adopt_version(w, d.vn);
    learn_neighbor(w, from, d.rank, d.rank_elem);
    reselect_and_advertise(w);
    after_version_adopt(w);
  } else if (d.vn == st_.version && st_.version > cfg().vn0) {
    if (vera_->rank_ok(suite(), d.rank_elem, d.rank, cfg().l)) {
      learn_neighbor(w, from, d.rank, d.rank_elem);
      reselect_and_advertise(w);
    } else {
      w.note(id_, "reject", {{"reason", to_string(SchemeVerdict::BadRankMac)},
                             {"from", from},
                             {"vn", d.vn}});
    }
  }
}

void ProtocolNode::handle_vpp_dio(World& w, NodeId from, const VppDio& d) {
  if (cfg().scheme != Scheme::VeraPlus || st_.is_root) return;
  if (st_.blocked.count(from) || !vpp_) return;
  if (d.vn > st_.version) {
    VppStore trial = *vpp_;
    SchemeVerdict v = trial.apply_update(suite(), d, cfg().l);
    if (v != SchemeVerdict::Accept) {
      w.note(id_, "reject",
             {{"reason", to_string(v)}, {"from", from}, {"vn", d.vn}});
      return;
    }
    vpp_ = std::move(trial);
    relay_key_ = d.key_cipher;
    adopt_version(w, d.vn);
    learn_neighbor(w, from, d.rank, d.rank_elem);
    reselect_and_advertise(w);
    after_version_adopt(w);
  } else if (d.vn == st_.version && st_.version > cfg().vn0) {
    if (vpp_->rank_ok(suite(), d.rank_elem, d.rank, cfg().l)) {
      learn_neighbor(w, from, d.rank, d.rank_elem);
      reselect_and_advertise(w);
    } else {
      w.note(id_, "reject",
             {{"reason", to_string(SchemeVerdict::DecryptAnchor)},
              {"from", from},
              {"vn", d.vn}});
    }
  }
}

void ProtocolNode::handle_dao(World& w, NodeId from, const Dao& d) {
  if (st_.blocked.count(from)) return;
  if (d.registering) {
    st_.children.insert(from);
    std::set<NodeId> sub(d.subtree.begin(), d.subtree.end());
    sub.insert(from);
    st_.routes[from] = std::move(sub);
  } else {
    st_.children.erase(from);
    st_.routes.erase(from);
  }
  send_dao(w);
  if (cfg().scheme == Scheme::Trail) maybe_complete_round(w);
}

void ProtocolNode::handle_announce(World& w, NodeId from,
                                   const RankAnnounce& a) {
  if (st_.blocked.count(from)) return;
  st_.announced_ranks[from] = a.rank;
  // Sibling audit: once the version has settled, a neighbor claiming our own
  // rank gets one challenge. We sit at the claimed rank, so our parent's
  // element is exactly the proof the claimant must hold.
  if (cfg().scheme != Scheme::VeraPlus || !cfg().challenge_response) return;
  if (!vpp_ || vpp_->cur_tail.empty() || !st_.attached() || st_.is_root)
    return;
  if (a.rank != st_.rank || w.now() < adopt_t_ + kChallengeQuiet) return;
  if (challenged_.count(from) || !nbr_elems_.count(st_.preferred_parent))
    return;
  challenged_.insert(from);
  uint64_t nonce = w.rng()();
  chall_out_[from] = OpenChallenge{nonce, a.rank, false};
  w.note(id_, "challenge", {{"suspect", from}, {"claimed", a.rank}});
  w.send(id_, from, Challenge{nonce});
  w.set_timer(id_, kChallengeWait, timer_tag(kTimChallenge, from));
}

void ProtocolNode::handle_datagram(World& w, NodeId from, const Datagram& d) {
  DatagramVerdict v = validate_datagram(st_, from, d);
  if (v != DatagramVerdict::Accept) {
    w.note(id_, "inconsistent",
           {{"reason", to_string(v)}, {"from", from}, {"rank", d.sender_rank}});
    return;
  }
  if (d.dst == id_) {
    w.note(id_, "probe", {{"src", d.src}});
    return;
  }
  Datagram f = d;
  f.sender_rank = advertised_rank();
  if (d.upward && !st_.is_root) {
    if (st_.attached()) w.send(id_, st_.preferred_parent, f);
  } else {
    f.upward = false;
    route_toward(w, d.dst, f);
  }
}

// ------------------------------------------------------ challenge-response

void ProtocolNode::on_challenge(World& w, NodeId from, const Challenge& c) {
  if (st_.is_root || !st_.attached()) return;
  auto pe = nbr_elems_.find(st_.preferred_parent);
  if (pe == nbr_elems_.end()) return;
  Bytes cipher = challenge_answer(suite(), pe->second, id_, c.nonce);
  w.send(id_, from, ChallengeResponse{cipher});
  w.send(id_, st_.preferred_parent, SolvedNotice{from, c.nonce, cipher,
                                                 st_.rank});
}

void ProtocolNode::handle_response(World& w, NodeId from,
                                   const ChallengeResponse& r) {
  auto it = chall_out_.find(from);
  if (it == chall_out_.end() || it->second.done) return;
  auto pe = nbr_elems_.find(st_.preferred_parent);
  if (pe == nbr_elems_.end()) return;
  if (challenge_check(suite(), pe->second, from, it->second.nonce, r.cipher)) {
    it->second.done = true;
    w.note(id_, "challenge_pass", {{"suspect", from}});
  }
}

void ProtocolNode::handle_solved(World& w, NodeId from, const SolvedNotice& sn) {
  if (own_elem_.empty() || sn.claimed != st_.rank + 1) return;
  if (!challenge_check(suite(), own_elem_, from, sn.nonce, sn.cipher)) return;
  w.note(id_, "vouch", {{"suspect", from}});
  route_up(w, ValidationReport{from, id_});
}

void ProtocolNode::handle_failure(World& w, NodeId from,
                                  const FailureNotice& fn) {
  if (!st_.is_root) {
    route_up(w, fn);
    return;
  }
  (void)from;
  if (adjudicated_.count(fn.suspect) || cases_.count(fn.suspect)) return;
  cases_[fn.suspect] = fn;
  w.note(id_, "accusation",
         {{"suspect", fn.suspect}, {"challenger", fn.challenger}});
  w.set_timer(id_, kAdjudicateWait, timer_tag(kTimAdjudicate, fn.suspect));
}

void ProtocolNode::handle_report(World& w, NodeId from,
                                 const ValidationReport& vr) {
  if (!st_.is_root) {
    route_up(w, vr);
    return;
  }
  (void)from;
  vouched_.insert(vr.suspect);
  w.note(id_, "report", {{"suspect", vr.suspect}, {"reporter", vr.reporter}});
}

void ProtocolNode::start_flood(World& w, Legitimation lg) {
  lg.flood = true;
  lg.hop_limit = 2;
  if (!isolations_seen_.count(lg.accused)) {
    isolations_seen_.insert(lg.accused);
    isolate(w, lg.accused);
  }
  w.multicast(id_, std::move(lg));
}

void ProtocolNode::handle_legitimation(World& w, NodeId from,
                                       const Legitimation& lg) {
  if (!accept_legitimation()) return;
  if (!legitimation_ok(suite(), lg)) {
    w.note(id_, "reject", {{"reason", "bad_signature"}, {"from", from}});
    return;
  }
  if (!lg.flood) {
    if (st_.children.count(lg.accused))
      start_flood(w, lg);
    else
      route_toward(w, lg.accused, lg);
    return;
  }
  if (isolations_seen_.count(lg.accused)) return;
  isolations_seen_.insert(lg.accused);
  isolate(w, lg.accused);
  auto lim =
      flood_forward_limit(lg.hop_limit, w.topo().linked(id_, lg.accused));
  if (lim) {
    Legitimation f = lg;
    f.hop_limit = *lim;
    w.multicast(id_, std::move(f));
  }
}

void ProtocolNode::isolate(World& w, NodeId accused) {
  w.note(id_, "isolate", {{"accused", accused}});
  st_.blocked.insert(accused);
  st_.neighbor_ranks.erase(accused);
  st_.announced_ranks.erase(accused);
  st_.parent_set.erase(accused);
  st_.children.erase(accused);
  st_.routes.erase(accused);
  nbr_elems_.erase(accused);
  if (st_.preferred_parent == accused) st_.preferred_parent = kNoNode;
  reselect_and_advertise(w);
}

// ------------------------------------------------------------ convergecast

void ProtocolNode::handle_contrib(World& w, NodeId from, const TrailContrib& c) {
  if (cfg().scheme != Scheme::Trail || contrib_sent_) return;
  intake_[from] = c;
  accounted_.insert(from);
  maybe_complete_round(w);
}

bool ProtocolNode::children_all_accounted() const {
  for (NodeId c : st_.children)
    if (!accounted_.count(c)) return false;
  return true;
}

void ProtocolNode::maybe_complete_round(World& w) {
  if (contrib_sent_ || !st_.attached()) return;
  if (!children_all_accounted()) return;
  if (st_.children.empty() && !st_.is_root) return;  // leaves go on the timer
  send_contribution_upward(w);
}

void ProtocolNode::send_contribution_upward(World& w) {
  if (cfg().scheme != Scheme::Trail || contrib_sent_) return;
  contrib_sent_ = true;
  shape_intake(w);
  FilterArray arr = trail_merge(cfg().bloom_m, cfg().bloom_k, intake_);
  for (const auto& [c, contrib] : intake_) sh_->registry.merger_of[c] = id_;
  sh_->registry.intake[id_] = intake_;
  if (st_.is_root) {
    TrailAttest a = make_attest(suite(), st_.version, std::move(arr));
    w.note(id_, "attest",
           {{"vn", st_.version}, {"elements", a.array.size()}});
    w.multicast(id_, std::move(a));
    return;
  }
  TrailContrib c;
  c.has_nonce = true;
  c.nonce = my_nonce_;
  c.array = std::move(arr);
  c = shape_contribution(w, std::move(c));
  sent_contrib_ = c;
  if (st_.attached()) w.send(id_, st_.preferred_parent, std::move(c));
}

void ProtocolNode::handle_attest(World& w, NodeId from, const TrailAttest& a) {
  (void)from;
  if (cfg().scheme != Scheme::Trail || st_.is_root || attest_done_) return;
  attest_done_ = true;
  if (!skip_hop_checks()) {
    TrailVerdict v =
        verify_attestation(suite(), a, st_.version, id_, st_.rank, my_nonce_,
                           sent_contrib_, 0, sh_->registry);
    w.note(id_, "trail_verdict",
           {{"result", to_string(v)}, {"vn", a.vn}});
  }
  if (!st_.children.empty()) w.multicast(id_, a);
}

// ------------------------------------------------------- single-path tests

void ProtocolNode::handle_trail_test(World& w, NodeId from, TrailTest t) {
  if (cfg().scheme != Scheme::TrailSingle) return;
  if (t.scribed == kNoRank) {
    t.scribed = advertised_rank();  // first hop: scribe our own rank once
    scribed_here_.insert(t.nonce);
  } else if (!skip_hop_checks() &&
             !trail_hop_ok(st_.rank, t.scribed, t.sender_rank)) {
    w.note(id_, "reject", {{"reason", "trail_hop"},
                           {"from", from},
                           {"scribed", t.scribed},
                           {"sender_rank", t.sender_rank}});
    return;
  }
  if (st_.is_root) {
    w.send(id_, from, make_trail_signed(suite(), t.nonce, t.scribed,
                                        st_.version));
    return;
  }
  reverse_[t.nonce] = from;
  t.sender_rank = advertised_rank();
  if (st_.attached()) w.send(id_, st_.preferred_parent, t);
}

void ProtocolNode::handle_trail_signed(World& w, NodeId from,
                                       const TrailSigned& t) {
  (void)from;
  if (cfg().scheme != Scheme::TrailSingle) return;
  if (test_.open && t.nonce == test_.nonce) {
    test_.open = false;
    bool ok = trail_signed_ok(suite(), t) && t.vn == st_.version &&
              t.scribed == test_.expect;
    w.note(id_, "trail_verdict",
           {{"result", ok ? "verified" : "scribe_mismatch"},
            {"vn", t.vn},
            {"scribed", t.scribed}});
    if (!ok && st_.preferred_parent != kNoNode) {
      st_.blocked.insert(st_.preferred_parent);
      st_.neighbor_ranks.erase(st_.preferred_parent);
      nbr_elems_.erase(st_.preferred_parent);
      st_.preferred_parent = kNoNode;
      reselect_and_advertise(w);
    }
    return;
  }
  auto it = reverse_.find(t.nonce);
  if (it == reverse_.end()) return;
  NodeId next = it->second;
  reverse_.erase(it);
  // The scriber hands the reply straight to the tester; everyone else only
  // relays while the scribed rank still lies below them.
  bool mine = scribed_here_.erase(t.nonce) > 0;
  if (!mine && !skip_hop_checks() && !trail_down_ok(st_.rank, t.scribed)) return;
  w.send(id_, next, t);
}

}  // namespace rpltrail
