#include "rpltrail/scenario.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "rpltrail/trail.hpp"

namespace rpltrail {

namespace {

bool only_keys(const Json& j, const std::set<std::string>& allowed,
               const std::string& where, std::string& err) {
  if (!j.is_object()) {
    err = where + ": expected an object";
    return false;
  }
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) {
      err = where + ": unknown key '" + k + "'";
      return false;
    }
  return true;
}

bool is_note(const LogRecord& r) { return r.info.is_object(); }

std::optional<Topology> parse_topology(const Json& j, uint64_t seed,
                                       std::string& err) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    err = "topology: missing string field 'kind'";
    return std::nullopt;
  }
  std::string kind = j["kind"];
  if (kind == "kary") {
    if (!only_keys(j, {"kind", "k", "h"}, "topology", err))
      return std::nullopt;
    if (!j.contains("k") || !j.contains("h")) {
      err = "topology: kary needs 'k' and 'h'";
      return std::nullopt;
    }
    uint32_t k = j["k"], h = j["h"];
    if (k < 2 || h < 1 || h > 10) {
      err = "topology: kary out of range";
      return std::nullopt;
    }
    return Topology::kary_tree(k, h);
  }
  if (kind == "line") {
    if (!only_keys(j, {"kind", "n"}, "topology", err)) return std::nullopt;
    int32_t n = j.value("n", 0);
    if (n < 2) {
      err = "topology: line needs n >= 2";
      return std::nullopt;
    }
    return Topology::line(n);
  }
  if (kind == "disk") {
    if (!only_keys(j, {"kind", "n", "radius"}, "topology", err))
      return std::nullopt;
    int32_t n = j.value("n", 0);
    double r = j.value("radius", 0.0);
    if (n < 2 || r <= 0 || r > 2) {
      err = "topology: disk needs n >= 2 and radius in (0, 2]";
      return std::nullopt;
    }
    return Topology::disk(n, r, seed);
  }
  if (kind == "explicit") {
    if (!only_keys(j, {"kind", "n", "links"}, "topology", err))
      return std::nullopt;
    int32_t n = j.value("n", 0);
    if (n < 2 || !j.contains("links") || !j["links"].is_array()) {
      err = "topology: explicit needs n and a links array";
      return std::nullopt;
    }
    std::vector<std::pair<NodeId, NodeId>> links;
    for (const auto& e : j["links"]) {
      if (!e.is_array() || e.size() != 2) {
        err = "topology: each link is a two-element array";
        return std::nullopt;
      }
      NodeId a = e[0], b = e[1];
      if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
        err = "topology: link endpoint out of range";
        return std::nullopt;
      }
      links.emplace_back(a, b);
    }
    return Topology::make(n, links);
  }
  err = "topology: unknown kind '" + kind + "'";
  return std::nullopt;
}

std::optional<AttackSpec> parse_attack(const Json& j, int32_t n,
                                       std::string& err) {
  AttackSpec a;
  if (j.is_null()) return a;
  if (!only_keys(j, {"kind", "nodes", "at_version", "delta", "variant"},
                 "attack", err))
    return std::nullopt;
  a.kind = j.value("kind", "");
  if (a.kind.empty()) return a;
  if (!attack_kind_known(a.kind)) {
    err = "attack: unknown kind '" + a.kind + "'";
    return std::nullopt;
  }
  if (!j.contains("nodes") || !j["nodes"].is_array() || j["nodes"].empty()) {
    err = "attack: needs a non-empty 'nodes' array";
    return std::nullopt;
  }
  for (const auto& e : j["nodes"]) {
    NodeId id = e;
    if (id <= 0 || id >= n) {
      err = "attack: node ids must be in [1, n)";
      return std::nullopt;
    }
    a.nodes.push_back(id);
  }
  a.at_version = j.value("at_version", 1u);
  a.delta = j.value("delta", 0);
  a.variant = j.value("variant", "");
  if (a.kind == "trail_manipulation") {
    static const std::set<std::string> variants = {
        "drop_children", "misplace",        "rearrange",
        "withhold_own",  "merge_on_behalf", "delete_nonces"};
    if (!variants.count(a.variant)) {
      err = "attack: trail_manipulation needs a known 'variant'";
      return std::nullopt;
    }
  }
  if ((a.kind == "k_chain_replay" || a.kind == "path_collusion") &&
      a.nodes.size() < 2) {
    err = "attack: colluding kinds need at least two nodes";
    return std::nullopt;
  }
  return a;
}

}  // namespace

std::vector<Rank> bfs_ranks(const Topology& topo) {
  std::vector<Rank> dist(topo.n, kNoRank);
  std::deque<NodeId> q{0};
  dist[0] = 0;
  while (!q.empty()) {
    NodeId u = q.front();
    q.pop_front();
    for (NodeId v : topo.adj[u])
      if (dist[v] == kNoRank) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
  }
  return dist;
}

std::optional<ScenarioConfig> parse_scenario(const Json& j, std::string& err) {
  if (!only_keys(j,
                 {"topology", "scheme", "suite", "seed", "versions", "l",
                  "loss_p", "challenge_response", "bloom", "attack", "expect"},
                 "scenario", err))
    return std::nullopt;
  ScenarioConfig sc;
  sc.seed = j.value("seed", 1u);
  if (!j.contains("topology")) {
    err = "scenario: missing 'topology'";
    return std::nullopt;
  }
  auto topo = parse_topology(j["topology"], sc.seed, err);
  if (!topo) return std::nullopt;
  sc.topo = std::move(*topo);
  sc.topo_spec = j["topology"];

  std::string scheme = j.value("scheme", "rpl");
  auto s = scheme_from_string(scheme);
  if (!s) {
    err = "scenario: unknown scheme '" + scheme + "'";
    return std::nullopt;
  }
  sc.scheme = *s;

  sc.suite_name = j.value("suite", "test");
  if (sc.suite_name != "test" && sc.suite_name != "production") {
    err = "scenario: suite is 'test' or 'production'";
    return std::nullopt;
  }
  sc.versions = j.value("versions", 1u);
  if (sc.versions > 64) {
    err = "scenario: versions out of range";
    return std::nullopt;
  }
  sc.l = j.value("l", 16);
  sc.loss_p = j.value("loss_p", 0.0);
  if (sc.loss_p < 0 || sc.loss_p >= 1) {
    err = "scenario: loss_p in [0, 1)";
    return std::nullopt;
  }
  sc.challenge_response = j.value("challenge_response", false);
  if (j.contains("bloom")) {
    if (!only_keys(j["bloom"], {"m", "k"}, "bloom", err)) return std::nullopt;
    sc.bloom_m = j["bloom"].value("m", 24u);
    sc.bloom_k = j["bloom"].value("k", 4u);
  }
  if (sc.bloom_m < 4 || sc.bloom_m > 4096 || sc.bloom_k < 1 ||
      sc.bloom_k > 16) {
    err = "scenario: bloom parameters out of range";
    return std::nullopt;
  }
  auto atk = parse_attack(j.contains("attack") ? j["attack"] : Json(), sc.topo.n,
                          err);
  if (!atk) return std::nullopt;
  sc.attack = std::move(*atk);
  sc.expect = j.value("expect", "");

  auto truth = bfs_ranks(sc.topo);
  Rank deepest = 0;
  for (Rank r : truth) {
    if (r == kNoRank) {
      err = "scenario: topology is not connected from node 0";
      return std::nullopt;
    }
    deepest = std::max(deepest, r);
  }
  if (sc.l < deepest + 2) {
    err = "scenario: l must be at least the deepest rank plus 2";
    return std::nullopt;
  }
  return sc;
}

Json ScenarioConfig::to_json() const {
  Json j;
  j["topology"] = topo_spec;
  j["scheme"] = to_string(scheme);
  j["suite"] = suite_name;
  j["seed"] = seed;
  j["versions"] = versions;
  j["l"] = l;
  j["loss_p"] = loss_p;
  j["challenge_response"] = challenge_response;
  j["bloom"] = Json{{"m", bloom_m}, {"k", bloom_k}};
  if (!attack.kind.empty()) {
    j["attack"] = Json{{"kind", attack.kind},
                       {"nodes", attack.nodes},
                       {"at_version", attack.at_version},
                       {"delta", attack.delta},
                       {"variant", attack.variant}};
  }
  if (!expect.empty()) j["expect"] = expect;
  return j;
}

namespace {

// Everything the outcome rules look at, folded out of the log in one pass.
struct Digest {
  std::set<VersionNo> issued;
  bool phantom = false;
  std::map<NodeId, Rank> believed;
  std::vector<NodeId> lifted;
  int honest_rejects = 0;
  int honest_isolations = 0;
  bool suspect_ruled_malicious = false;
  std::map<NodeId, std::string> adjudications;
  // last convergecast verdict per (vn, node), plus the last round seen
  std::map<VersionNo, std::map<NodeId, std::string>> round_verdicts;
  VersionNo last_round = 0;
  bool any_round = false;
  bool honest_path_alarm = false;  // single-path timeout or scribe mismatch
};

Digest digest_log(const ScenarioConfig& sc, const std::vector<LogRecord>& log) {
  Digest d;
  std::set<NodeId> bad(sc.attack.nodes.begin(), sc.attack.nodes.end());
  auto honest = [&](NodeId id) { return !bad.count(id); };
  for (const auto& r : log) {
    if (!is_note(r)) continue;
    NodeId who = r.from;
    if (r.kind == "version") {
      VersionNo vn = r.info["vn"];
      if (who == 0 && r.info.value("issued", false)) d.issued.insert(vn);
      else if (honest(who) && who != 0 && vn > 0 && !d.issued.count(vn))
        d.phantom = true;
    } else if (r.kind == "adopt") {
      d.believed[who] = Rank(r.info["rank"]);
    } else if (r.kind == "detach") {
      d.believed[who] = kNoRank;
    } else if (r.kind == "reject" && honest(who)) {
      d.honest_rejects++;
    } else if (r.kind == "isolate" && honest(who)) {
      d.honest_isolations++;
    } else if (r.kind == "adjudicate") {
      std::string verdict = r.info["verdict"];
      d.adjudications[NodeId(r.info["suspect"])] = verdict;
      if (verdict == "suspect_malicious") d.suspect_ruled_malicious = true;
    } else if (r.kind == "trail_verdict") {
      std::string result = r.info["result"];
      if (result == "timeout" || result == "scribe_mismatch") {
        if (honest(who)) d.honest_path_alarm = true;
      } else if (result != "verified" || r.info.contains("scribed")) {
        // single-path verified notes carry the scribed rank; convergecast
        // notes carry only the round number
        if (!r.info.contains("scribed")) {
          VersionNo vn = r.info["vn"];
          d.round_verdicts[vn][who] = result;
          d.last_round = std::max(d.last_round, vn);
          d.any_round = true;
        }
      }
    }
  }
  // convergecast "verified" notes also land in round_verdicts
  for (const auto& r : log) {
    if (!is_note(r) || r.kind != "trail_verdict") continue;
    if (r.info.value("result", "") == "verified" && !r.info.contains("scribed")) {
      VersionNo vn = r.info["vn"];
      d.round_verdicts[vn][r.from] = "verified";
      d.last_round = std::max(d.last_round, vn);
      d.any_round = true;
    }
  }
  auto truth = bfs_ranks(sc.topo);
  for (const auto& [id, rank] : d.believed)
    if (honest(id) && rank != kNoRank && truth[id] != kNoRank &&
        rank < truth[id])
      d.lifted.push_back(id);
  return d;
}

}  // namespace

std::string evaluate_outcome(const ScenarioConfig& sc,
                             const std::vector<LogRecord>& log) {
  const std::string& kind = sc.attack.kind;
  if (kind.empty()) return "clean";
  Digest d = digest_log(sc, log);
  std::set<NodeId> bad(sc.attack.nodes.begin(), sc.attack.nodes.end());

  bool lifted = !d.lifted.empty();
  bool cr_detected = d.suspect_ruled_malicious && d.honest_isolations > 0;

  bool round_alarm = false;       // honest complaint in the final round
  bool round_all_verified = true; // every honest verdict of that round
  bool self_excluded = false;     // attacker flagged its own absence
  if (d.any_round) {
    for (const auto& [who, result] : d.round_verdicts[d.last_round]) {
      if (bad.count(who)) {
        if (result == "nonce_missing") self_excluded = true;
        continue;
      }
      if (result != "verified") {
        round_alarm = true;
        round_all_verified = false;
      }
    }
  }

  if (kind == "version_attack") return d.phantom ? "succeeded" : "blocked";

  if (kind == "rank_spoof" || kind == "rank_replay" || kind == "chain_forgery") {
    switch (sc.scheme) {
      case Scheme::Vera:
      case Scheme::VeraPlus:
        if (cr_detected) return "detected";
        return lifted ? "succeeded" : "blocked";
      case Scheme::TrailSingle:
        if (d.honest_path_alarm) return "detected";
        return lifted ? "succeeded" : "blocked";
      case Scheme::Trail:
        if (round_alarm) return "detected";
        return lifted ? "succeeded" : "blocked";
      case Scheme::Rpl:
        return lifted ? "succeeded" : "blocked";
    }
  }
  if (kind == "trail_manipulation") {
    if (round_alarm) return "detected";
    if (self_excluded && round_all_verified) return "self-exclusion";
    return lifted ? "succeeded" : "blocked";
  }
  if (kind == "k_chain_replay") {
    if (round_alarm) return "detected";
    if (lifted && round_all_verified && d.any_round) return "blind-spot";
    return lifted ? "succeeded" : "blocked";
  }
  if (kind == "path_collusion") {
    if (d.honest_path_alarm) return "detected";
    return lifted ? "blind-spot" : "blocked";
  }
  return "clean";
}

Json build_detail(const ScenarioConfig& sc, const std::vector<LogRecord>& log) {
  Digest d = digest_log(sc, log);
  auto truth = bfs_ranks(sc.topo);
  Json detail;
  detail["truth"] = truth;
  Json believed = Json::object();
  for (const auto& [id, rank] : d.believed)
    believed[std::to_string(id)] = rank;
  detail["believed"] = believed;
  detail["attackers"] = sc.attack.nodes;
  detail["lifted"] = d.lifted;
  detail["phantom_version"] = d.phantom;
  detail["honest_rejects"] = d.honest_rejects;
  detail["honest_isolations"] = d.honest_isolations;
  Json adj = Json::object();
  for (const auto& [id, v] : d.adjudications) adj[std::to_string(id)] = v;
  detail["adjudications"] = adj;
  if (d.any_round) {
    detail["last_round"] = d.last_round;
    Json verdicts = Json::object();
    for (const auto& [who, res] : d.round_verdicts[d.last_round])
      verdicts[std::to_string(who)] = res;
    detail["round_verdicts"] = verdicts;
  }
  size_t messages = 0;
  double bytes = 0;
  std::map<std::string, std::pair<size_t, double>> kinds;
  for (const auto& r : log) {
    if (is_note(r) || r.kind == "timer") continue;
    messages++;
    bytes += r.bytes;
    auto& slot = kinds[r.kind];
    slot.first++;
    slot.second += r.bytes;
  }
  detail["messages"] = messages;
  detail["bytes"] = bytes;
  Json per_kind = Json::object();
  for (const auto& [kind, slot] : kinds)
    per_kind[kind] = Json{{"count", slot.first}, {"bytes", slot.second}};
  detail["per_kind"] = per_kind;
  return detail;
}

Json RunReport::to_json() const {
  Json j;
  j["outcome"] = outcome;
  j["drained"] = drained;
  j["detail"] = detail;
  return j;
}

RunReport run_scenario(const ScenarioConfig& sc) {
  PrimitiveSuite suite = sc.suite_name == "production" ? make_production_suite()
                                                       : make_test_suite();
  World w(sc.topo, sc.seed);
  w.elem_width = suite.width;
  w.sig_width = suite.sig_width;
  w.loss.p = sc.loss_p;

  auto sh = std::make_shared<Shared>();
  sh->cfg.scheme = sc.scheme;
  sh->cfg.challenge_response = sc.challenge_response;
  sh->cfg.l = sc.l;
  sh->cfg.versions = sc.versions;
  sh->cfg.vn0 = 0;
  sh->cfg.bloom_m = sc.bloom_m;
  sh->cfg.bloom_k = sc.bloom_k;
  sh->chains =
      ChainSet::build(suite, w.rng(), sc.versions + 2, uint32_t(sc.l));
  sh->suite = std::move(suite);

  for (NodeId i = 0; i < sc.topo.n; ++i)
    w.attach(i, make_protocol_node(i, sh, sc.attack));
  w.set_timer(0, 0, timer_tag(kTimBootstrap));

  RunReport r;
  r.drained = w.run();
  r.log = w.log();
  r.outcome = evaluate_outcome(sc, r.log);
  r.detail = build_detail(sc, r.log);
  return r;
}

// ------------------------------------------------------------- reports

Json overhead_table() {
  Json rows = Json::array();
  const std::pair<uint32_t, uint32_t> shapes[] = {{2, 3}, {2, 4}, {2, 5},
                                                  {4, 3}, {4, 4}, {4, 5}};
  for (auto [k, h] : shapes) {
    auto pred = predicted_sizes(k, h);
    ScenarioConfig sc;
    sc.topo = Topology::kary_tree(k, h);
    sc.topo_spec = Json{{"kind", "kary"}, {"k", k}, {"h", h}};
    sc.scheme = Scheme::Trail;
    sc.versions = 0;
    sc.seed = 42;
    sc.l = Rank(h) + 2;
    sc.bloom_m = 6 * k;
    sc.bloom_k = 2;
    RunReport rep = run_scenario(sc);

    auto truth = bfs_ranks(sc.topo);
    double max_sim = 0;
    std::vector<double> per_depth_sim(h + 1, -1);
    double up_total = 0;
    size_t up_count = 0;
    for (const auto& r : rep.log) {
      if (is_note(r) || r.kind == "timer") continue;
      if (r.kind == "trail_attest") {
        max_sim = std::max(max_sim, r.bytes);
      } else if (r.kind == "trail_up") {
        per_depth_sim[truth[r.from]] = r.bytes;
        up_total += r.bytes;
        up_count++;
      }
    }
    per_depth_sim[0] = max_sim;

    Json row;
    row["k"] = k;
    row["h"] = h;
    row["nodes"] = pred ? pred->nodes : 0;
    row["slice_bytes"] = pred ? pred->slice_bytes : 0;
    row["max_bytes"] = pred ? pred->max_bytes : 0;
    row["max_bytes_simulated"] = max_sim;
    row["avg_bytes"] = pred ? pred->avg_bytes : 0;
    row["avg_bytes_simulated"] = up_count ? up_total / double(up_count) : 0;
    row["per_depth_up_bytes"] =
        pred ? Json(pred->per_depth_up_bytes) : Json::array();
    row["per_depth_simulated"] = per_depth_sim;
    row["contrib_messages"] = up_count;
    rows.push_back(std::move(row));
  }
  Json out;
  out["slice_bits"] = "6k";
  out["avg_convention"] = "max spread over k+1";
  out["rows"] = rows;
  return out;
}

namespace {

Json replay7_spec() {
  return Json{{"kind", "explicit"},
              {"n", 7},
              {"links", Json::array({Json::array({0, 1}), Json::array({0, 2}),
                                     Json::array({1, 3}), Json::array({1, 4}),
                                     Json::array({2, 4}), Json::array({3, 5}),
                                     Json::array({3, 6}), Json::array({4, 5}),
                                     Json::array({4, 6})})}};
}

ScenarioConfig matrix_cell(const Json& spec) {
  std::string err;
  auto sc = parse_scenario(spec, err);
  if (!sc) throw std::runtime_error("internal matrix cell invalid: " + err);
  return *sc;
}

}  // namespace

Json attack_matrix() {
  struct Cell {
    const char* scheme;
    Json attack;
    Json topo;
    uint32_t versions;
    bool cr;
    uint32_t bloom_m;
    const char* expect;
  };
  Json kary23 = Json{{"kind", "kary"}, {"k", 2}, {"h", 3}};
  Json line6 = Json{{"kind", "line"}, {"n", 6}};
  auto atk = [](const char* kind, std::vector<NodeId> nodes, uint32_t at = 1,
                const char* variant = "") {
    return Json{{"kind", kind},
                {"nodes", nodes},
                {"at_version", at},
                {"variant", variant}};
  };
  std::vector<Cell> cells = {
      {"rpl", atk("version_attack", {3}), replay7_spec(), 1, false, 24,
       "succeeded"},
      {"vera", atk("version_attack", {3}), replay7_spec(), 1, false, 24,
       "blocked"},
      {"rpl", atk("rank_spoof", {3}), replay7_spec(), 1, false, 24,
       "succeeded"},
      {"vera", atk("rank_spoof", {3}), replay7_spec(), 1, false, 24, "blocked"},
      {"vera", atk("rank_replay", {3}), replay7_spec(), 1, false, 24,
       "succeeded"},
      {"vera++", atk("rank_replay", {3}), replay7_spec(), 1, false, 24,
       "succeeded"},
      {"vera++", atk("rank_replay", {3}), replay7_spec(), 1, true, 24,
       "detected"},
      {"vera", atk("chain_forgery", {1}), kary23, 2, false, 24, "succeeded"},
      {"vera++", atk("chain_forgery", {1}), kary23, 2, false, 24, "blocked"},
      {"trail-single", atk("rank_spoof", {3}), replay7_spec(), 1, false, 24,
       "detected"},
      {"trail-single", atk("path_collusion", {2, 3}), line6, 0, false, 24,
       "blind-spot"},
      {"trail", atk("trail_manipulation", {1}, 1, "drop_children"), kary23, 0,
       false, 48, "detected"},
      {"trail", atk("trail_manipulation", {1}, 1, "misplace"), kary23, 0,
       false, 48, "detected"},
      {"trail", atk("trail_manipulation", {1}, 1, "rearrange"), kary23, 0,
       false, 48, "detected"},
      {"trail", atk("trail_manipulation", {1}, 1, "withhold_own"), kary23, 0,
       false, 48, "self-exclusion"},
      {"trail", atk("trail_manipulation", {1}, 1, "merge_on_behalf"), kary23,
       0, false, 48, "detected"},
      {"trail", atk("trail_manipulation", {1}, 1, "delete_nonces"), kary23, 0,
       false, 48, "detected"},
      {"trail", atk("rank_spoof", {5}), kary23, 1, false, 48, "detected"},
      {"trail", atk("k_chain_replay", {1, 3}), kary23, 0, false, 48,
       "blind-spot"},
  };
  Json out = Json::array();
  for (const auto& c : cells) {
    Json spec;
    spec["topology"] = c.topo;
    spec["scheme"] = c.scheme;
    spec["seed"] = 42;
    spec["versions"] = c.versions;
    spec["l"] = 8;
    spec["challenge_response"] = c.cr;
    spec["bloom"] = Json{{"m", c.bloom_m}, {"k", 4}};
    spec["attack"] = c.attack;
    ScenarioConfig sc = matrix_cell(spec);
    RunReport rep = run_scenario(sc);
    Json cell;
    cell["scheme"] = c.scheme;
    cell["attack"] = c.attack["kind"];
    std::string variant = c.attack.value("variant", "");
    if (!variant.empty()) cell["variant"] = variant;
    cell["challenge_response"] = c.cr;
    cell["topology"] = c.topo["kind"] == "explicit" ? "replay7"
                       : c.topo["kind"] == "line"   ? "line6"
                                                    : "kary(2,3)";
    cell["outcome"] = rep.outcome;
    cell["expect"] = c.expect;
    cell["match"] = rep.outcome == std::string(c.expect);
    out.push_back(std::move(cell));
  }
  Json top;
  top["cells"] = out;
  return top;
}

}  // namespace rpltrail
