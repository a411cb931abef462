#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rpltrail/adversary.hpp"
#include "rpltrail/simnet.hpp"

namespace rpltrail {

// One fully pinned simulation: topology, protocol, attack, seed. Every
// field has a canonical JSON spelling; parsing is strict so a typo in a
// config fails loudly instead of silently running a different experiment.
struct ScenarioConfig {
  Json topo_spec;  // canonical echo of the topology description
  Topology topo;
  Scheme scheme = Scheme::Rpl;
  std::string suite_name = "test";  // "test" | "production"
  uint64_t seed = 1;
  uint32_t versions = 1;  // updates issued after the bootstrap epoch
  Rank l = 16;            // deepest authenticated rank
  double loss_p = 0;
  bool challenge_response = false;
  uint32_t bloom_m = 24;
  uint32_t bloom_k = 4;
  AttackSpec attack;
  std::string expect;  // optional expected outcome label

  Json to_json() const;
};

std::optional<ScenarioConfig> parse_scenario(const Json& j, std::string& err);

// Hop distances from the root over the full link set; the ground truth any
// rank claim is judged against.
std::vector<Rank> bfs_ranks(const Topology& topo);

struct RunReport {
  std::string outcome;
  bool drained = true;  // event queue ran dry before the budget
  Json detail;          // believed vs true ranks, note digests, byte totals
  std::vector<LogRecord> log;

  Json to_json() const;  // everything except the raw log
};

RunReport run_scenario(const ScenarioConfig& sc);

// Pure function of the config and the event log; recomputable by anyone
// holding the two.
std::string evaluate_outcome(const ScenarioConfig& sc,
                             const std::vector<LogRecord>& log);
Json build_detail(const ScenarioConfig& sc, const std::vector<LogRecord>& log);

// Collection-round payload sizes over full k-ary trees: closed form next to
// a measured run of each shape.
Json overhead_table();

// The canonical scheme-vs-attack grid with expected labels.
Json attack_matrix();

}  // namespace rpltrail
