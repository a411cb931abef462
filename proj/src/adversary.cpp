#include "rpltrail/adversary.hpp"

#include <algorithm>
#include <array>

namespace rpltrail {

namespace {

Bytes rand_bytes(World& w, size_t n) {
  Bytes b(n);
  for (auto& x : b) x = uint8_t(w.rng()());
  return b;
}

// Announces a version number the root has not issued yet. Against the
// plain beacon this drags every listener into a phantom epoch; chain
// receivers demand the matching chain element and refuse.
class VersionAttacker : public ProtocolNode {
 public:
  VersionAttacker(NodeId id, std::shared_ptr<Shared> sh, AttackSpec a)
      : ProtocolNode(id, std::move(sh)), atk_(std::move(a)) {}

 protected:
  void after_version_adopt(World& w) override {
    if (st_.version == cfg().vn0 + atk_.at_version)
      w.set_timer(id_, kAttackDelay, timer_tag(kTimAttack));
  }

  void on_attack_timer(World& w) override {
    VersionNo forged = st_.version + 1;
    w.multicast(id_, DioPlain{forged, 0});
    size_t ew = suite().width;
    if (cfg().scheme == Scheme::Vera)
      w.multicast(id_, VeraDio{forged, rand_bytes(w, ew), rand_bytes(w, ew),
                               rand_bytes(w, ew), 0});
    if (cfg().scheme == Scheme::VeraPlus)
      w.multicast(id_, VppDio{forged, rand_bytes(w, ew), rand_bytes(w, ew),
                              rand_bytes(w, ew), 0});
  }

  AttackSpec atk_;
};

// Claims a better rank than it holds while keeping everything else honest.
class RankSpoofer : public ProtocolNode {
 public:
  RankSpoofer(NodeId id, std::shared_ptr<Shared> sh, AttackSpec a)
      : ProtocolNode(id, std::move(sh)), atk_(std::move(a)) {}

 protected:
  Rank advertised_rank() const override {
    if (!active_ || st_.rank == kNoRank) return st_.rank;
    if (atk_.delta > 0) return std::max(0, st_.rank - atk_.delta);
    return 0;
  }

  void after_version_adopt(World& w) override {
    if (st_.version < cfg().vn0 + atk_.at_version) return;
    active_ = true;
    last_sent_rank_ = kNoRank;
    advertise(w);
  }

  AttackSpec atk_;
  bool active_ = false;
};

// Re-advertises a rank element overheard from a shallower neighbor. The
// element is valid, just not its own; it stays silent when challenged.
class RankReplayer : public ProtocolNode {
 public:
  RankReplayer(NodeId id, std::shared_ptr<Shared> sh, AttackSpec a)
      : ProtocolNode(id, std::move(sh)), atk_(std::move(a)) {}

 protected:
  Rank advertised_rank() const override {
    return active_ ? claim_rank_ : st_.rank;
  }
  Bytes advertised_elem() const override {
    return active_ ? claim_elem_ : own_elem_;
  }

  void after_version_adopt(World& w) override {
    active_ = false;
    if (st_.version == cfg().vn0 + atk_.at_version)
      w.set_timer(id_, kAttackDelay, timer_tag(kTimAttack));
  }

  void on_attack_timer(World& w) override {
    NodeId best = kNoNode;
    for (const auto& [nbr, rank] : st_.neighbor_ranks) {
      if (!nbr_elems_.count(nbr) || rank >= st_.rank) continue;
      if (best == kNoNode || rank < st_.neighbor_ranks[best]) best = nbr;
    }
    if (best == kNoNode) return;
    claim_rank_ = st_.neighbor_ranks[best];
    claim_elem_ = nbr_elems_[best];
    active_ = true;
    last_sent_rank_ = kNoRank;
    advertise(w);
  }

  void on_challenge(World&, NodeId, const Challenge&) override {}
  bool accept_legitimation() const override { return false; }

  AttackSpec atk_;
  bool active_ = false;
  Rank claim_rank_ = kNoRank;
  Bytes claim_elem_;
};

// Starves its children for two consecutive updates, then forges the pair.
// The first forged message is built from withheld real material but swaps
// in a mac anchoring a self-made rank chain; the second rides on that
// anchor and claims the root rank. Against the cipher-anchored scheme the
// second message cannot be produced and the subtree merely runs late.
class ChainForger : public ProtocolNode {
 public:
  ChainForger(NodeId id, std::shared_ptr<Shared> sh, AttackSpec a)
      : ProtocolNode(id, std::move(sh)), atk_(std::move(a)) {}

 protected:
  bool withhold_version(VersionNo vn) const override {
    return vn == cfg().vn0 + atk_.at_version ||
           vn == cfg().vn0 + atk_.at_version + 1;
  }

  void after_version_adopt(World& w) override {
    Snap s;
    s.elem = own_elem_;
    s.rank = st_.rank;
    if (vera_) s.v = vera_->v;
    if (vpp_) {
      s.v = vpp_->v;
      s.key = relay_key_;
    }
    hist_[st_.version] = std::move(s);
    if (st_.version == cfg().vn0 + atk_.at_version + 1)
      w.set_timer(id_, kAttackDelay, timer_tag(kTimAttack));
  }

  void on_attack_timer(World& w) override {
    VersionNo lo = cfg().vn0 + atk_.at_version;
    auto it = hist_.find(lo);
    if (it == hist_.end()) return;
    const Snap& old = it->second;
    if (cfg().scheme == Scheme::Vera && vera_) {
      Bytes x = rand_bytes(w, suite().width);
      Bytes fake_tail = hash_forward(suite(), x, uint64_t(cfg().l) + 1);
      Bytes fake_mac = suite().mac(vera_->v, fake_tail);
      w.multicast(id_, VeraDio{lo, old.v, fake_mac, old.elem, old.rank});
      w.multicast(id_,
                  VeraDio{lo + 1, vera_->v, Bytes{}, suite().hash(x), 0});
    }
    if (cfg().scheme == Scheme::VeraPlus && vpp_) {
      w.multicast(id_, VppDio{lo, old.v, old.key, old.elem, old.rank});
      w.multicast(id_, VppDio{lo + 1, vpp_->v, rand_bytes(w, suite().width),
                              rand_bytes(w, suite().width), 0});
    }
  }

  struct Snap {
    Bytes v, key, elem;
    Rank rank = kNoRank;
  };
  AttackSpec atk_;
  std::map<VersionNo, Snap> hist_;
};

// A merging node that mangles the collection round it forwards.
class TrailManipulator : public ProtocolNode {
 public:
  TrailManipulator(NodeId id, std::shared_ptr<Shared> sh, AttackSpec a)
      : ProtocolNode(id, std::move(sh)), atk_(std::move(a)) {}

 protected:
  void shape_intake(World&) override {
    if (intake_.empty()) return;
    NodeId victim = intake_.begin()->first;
    if (atk_.variant == "drop_children") {
      intake_.erase(victim);
    } else if (atk_.variant == "delete_nonces") {
      for (auto& [id, c] : intake_) c.has_nonce = false;
    } else if (atk_.variant == "misplace") {
      stolen_ = intake_[victim].nonce;
      have_stolen_ = intake_[victim].has_nonce;
      intake_[victim].has_nonce = false;
    } else if (atk_.variant == "merge_on_behalf") {
      TrailContrib old = intake_[victim];
      Intake wrap{{victim, std::move(old)}};
      TrailContrib c;
      c.has_nonce = false;
      c.array = trail_merge(cfg().bloom_m, cfg().bloom_k, wrap);
      intake_[victim] = std::move(c);
    }
  }

  TrailContrib shape_contribution(World&, TrailContrib c) override {
    if (atk_.variant == "withhold_own") {
      c.has_nonce = false;
    } else if (atk_.variant == "rearrange" && c.array.size() > 1) {
      auto& sl = c.array.elems[1].slices;
      std::reverse(sl.begin(), sl.end());
    } else if (atk_.variant == "misplace" && have_stolen_) {
      if (c.array.size() > 1 && !c.array.elems[1].slices.empty())
        c.array.elems[1].slices[0].insert(stolen_);
    }
    return c;
  }

  AttackSpec atk_;
  Nonce stolen_ = 0;
  bool have_stolen_ = false;
};

// Shallow end of a colluding chain: accepts raw contributions smuggled up
// by its partners and merges them as if the depth between never existed.
class ColluderTop : public ProtocolNode {
 public:
  ColluderTop(NodeId id, std::shared_ptr<Shared> sh)
      : ProtocolNode(id, std::move(sh)) {}

 protected:
  bool skip_hop_checks() const override { return true; }

  void on_colluder_relay(World& w, NodeId from,
                         const ColluderRelay& r) override {
    for (const auto& [id, c] : r.contribs) intake_[id] = c;
    accounted_.insert(from);
    maybe_complete_round(w);
  }
};

// Deeper link of the chain: understates its rank by its chain position,
// swallows its own nonce, and tunnels everything it collects to the next
// link up instead of contributing.
class ColluderLink : public ProtocolNode {
 public:
  ColluderLink(NodeId id, std::shared_ptr<Shared> sh, int index)
      : ProtocolNode(id, std::move(sh)), index_(index) {}

 protected:
  Rank advertised_rank() const override {
    if (st_.rank == kNoRank) return st_.rank;
    return std::max(0, st_.rank - index_);
  }
  bool skip_hop_checks() const override { return true; }

  void on_colluder_relay(World& w, NodeId from,
                         const ColluderRelay& r) override {
    for (const auto& [id, c] : r.contribs) relayed_.emplace_back(id, c);
    accounted_.insert(from);
    maybe_complete_round(w);
  }

  void send_contribution_upward(World& w) override {
    if (cfg().scheme != Scheme::Trail || contrib_sent_) return;
    contrib_sent_ = true;
    ColluderRelay r;
    for (const auto& [id, c] : intake_) r.contribs.emplace_back(id, c);
    for (auto& p : relayed_) r.contribs.push_back(std::move(p));
    relayed_.clear();
    if (st_.attached()) w.send(id_, st_.preferred_parent, std::move(r));
  }

  int index_;
  std::vector<std::pair<NodeId, TrailContrib>> relayed_;
};

// Single-path variant of the pair: the upper node only stops checking,
// the lower one additionally understates its rank by one.
class PathColluder : public ProtocolNode {
 public:
  PathColluder(NodeId id, std::shared_ptr<Shared> sh, bool lower)
      : ProtocolNode(id, std::move(sh)), lower_(lower) {}

 protected:
  bool skip_hop_checks() const override { return true; }
  Rank advertised_rank() const override {
    if (!lower_ || st_.rank == kNoRank) return st_.rank;
    return std::max(0, st_.rank - 1);
  }

  bool lower_;
};

}  // namespace

bool attack_kind_known(const std::string& kind) {
  static const std::array<const char*, 7> kinds = {
      "version_attack",   "rank_spoof",        "rank_replay",
      "chain_forgery",    "trail_manipulation", "k_chain_replay",
      "path_collusion"};
  return std::any_of(kinds.begin(), kinds.end(),
                     [&](const char* k) { return kind == k; });
}

std::unique_ptr<Node> make_protocol_node(NodeId id, std::shared_ptr<Shared> sh,
                                         const AttackSpec& atk) {
  auto pos = std::find(atk.nodes.begin(), atk.nodes.end(), id);
  if (atk.kind.empty() || pos == atk.nodes.end())
    return std::make_unique<ProtocolNode>(id, std::move(sh));
  int index = int(pos - atk.nodes.begin());
  if (atk.kind == "version_attack")
    return std::make_unique<VersionAttacker>(id, std::move(sh), atk);
  if (atk.kind == "rank_spoof")
    return std::make_unique<RankSpoofer>(id, std::move(sh), atk);
  if (atk.kind == "rank_replay")
    return std::make_unique<RankReplayer>(id, std::move(sh), atk);
  if (atk.kind == "chain_forgery")
    return std::make_unique<ChainForger>(id, std::move(sh), atk);
  if (atk.kind == "trail_manipulation")
    return std::make_unique<TrailManipulator>(id, std::move(sh), atk);
  if (atk.kind == "k_chain_replay") {
    if (index == 0) return std::make_unique<ColluderTop>(id, std::move(sh));
    return std::make_unique<ColluderLink>(id, std::move(sh), index);
  }
  if (atk.kind == "path_collusion")
    return std::make_unique<PathColluder>(id, std::move(sh), index > 0);
  return std::make_unique<ProtocolNode>(id, std::move(sh));
}

}  // namespace rpltrail
