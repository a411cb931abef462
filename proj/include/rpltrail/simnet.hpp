#pragma once

#include <functional>
#include <memory>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpltrail/graph.hpp"
#include "rpltrail/messages.hpp"

namespace rpltrail {

using Json = nlohmann::ordered_json;

struct LogRecord {
  uint64_t t = 0;
  uint64_t seq = 0;
  NodeId from = kNoNode;
  NodeId to = kNoNode;
  std::string kind;
  double bytes = 0;
  Json info;  // bookkeeping payload, empty for plain deliveries

  Json to_json() const;
  static LogRecord from_json(const Json& j);
};

struct LossModel {
  double p = 0;  // iid delivery drop probability
  // Targeted suppression; delivery is dropped when this returns true.
  std::function<bool(NodeId from, NodeId to, const Message&)> jam;
};

class World;

class Node {
 public:
  virtual ~Node() = default;
  virtual void on_message(World& w, NodeId from, const Message& m) = 0;
  virtual void on_timer(World& w, int tag) {}
};

// Discrete event world: integer ticks, unit link latency, total order by
// (time, sequence number). All randomness flows through the single seeded
// generator, so one seed pins the entire run.
class World {
 public:
  World(Topology topo, uint64_t seed);

  void attach(NodeId id, std::unique_ptr<Node> node);

  void send(World&) = delete;
  void send(NodeId from, NodeId to, Message msg);  // unicast to a neighbor
  void multicast(NodeId from, Message msg);        // to every radio neighbor
  void set_timer(NodeId node, uint64_t delay, int tag);

  // Zero-byte bookkeeping record (verdicts, state transitions).
  void note(NodeId node, const std::string& kind, Json info);

  // Processes events until the queue drains; false when the event budget is
  // exhausted first.
  bool run(uint64_t max_events = 2'000'000);

  uint64_t now() const { return now_; }
  std::mt19937_64& rng() { return rng_; }
  const Topology& topo() const { return topo_; }
  Topology& topo_mutable() { return topo_; }
  const std::vector<LogRecord>& log() const { return log_; }
  Node& node(NodeId id) { return *nodes_[id]; }

  // Model sizes for the log; set once by the scenario.
  size_t elem_width = 8;
  size_t sig_width = 8;
  LossModel loss;

 private:
  struct Event {
    uint64_t t;
    uint64_t seq;
    NodeId to;
    NodeId from;   // kNoNode for timers
    int timer_tag; // valid when timer
    bool is_timer;
    Message msg;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.t != b.t ? a.t > b.t : a.seq > b.seq;
    }
  };

  void deliver(NodeId from, NodeId to, Message&& msg);

  Topology topo_;
  std::mt19937_64 rng_;
  std::vector<std::unique_ptr<Node>> nodes_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::vector<LogRecord> log_;
  uint64_t now_ = 0;
  uint64_t next_seq_ = 0;
};

}  // namespace rpltrail
