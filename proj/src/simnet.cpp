#include "rpltrail/simnet.hpp"

#include <cassert>
#include <cmath>

namespace rpltrail {

Json LogRecord::to_json() const {
  Json j;
  j["t"] = t;
  j["seq"] = seq;
  j["from"] = from;
  j["to"] = to;
  j["kind"] = kind;
  // Integral sizes stay integers so serialization is stable and readable;
  // filter payloads keep their fractional half bytes.
  double rounded = std::floor(bytes);
  if (rounded == bytes)
    j["bytes"] = static_cast<int64_t>(bytes);
  else
    j["bytes"] = bytes;
  if (!info.is_null()) j["info"] = info;
  return j;
}

LogRecord LogRecord::from_json(const Json& j) {
  LogRecord r;
  r.t = j.at("t").get<uint64_t>();
  r.seq = j.at("seq").get<uint64_t>();
  r.from = j.at("from").get<NodeId>();
  r.to = j.at("to").get<NodeId>();
  r.kind = j.at("kind").get<std::string>();
  r.bytes = j.at("bytes").get<double>();
  if (j.contains("info")) r.info = j.at("info");
  return r;
}

World::World(Topology topo, uint64_t seed)
    : topo_(std::move(topo)), rng_(seed), nodes_(topo_.n) {}

void World::attach(NodeId id, std::unique_ptr<Node> node) {
  assert(id >= 0 && id < topo_.n);
  nodes_[id] = std::move(node);
}

void World::deliver(NodeId from, NodeId to, Message&& msg) {
  if (loss.jam && loss.jam(from, to, msg)) return;
  if (loss.p > 0) {
    double draw = double(rng_() >> 11) * 0x1.0p-53;
    if (draw < loss.p) return;
  }
  queue_.push(Event{now_ + 1, next_seq_++, to, from, 0, false, std::move(msg)});
}

void World::send(NodeId from, NodeId to, Message msg) {
  assert(topo_.linked(from, to));
  deliver(from, to, std::move(msg));
}

void World::multicast(NodeId from, Message msg) {
  for (NodeId nb : topo_.adj[from]) deliver(from, nb, Message(msg));
}

void World::set_timer(NodeId node, uint64_t delay, int tag) {
  queue_.push(Event{now_ + delay, next_seq_++, node, kNoNode, tag, true, {}});
}

void World::note(NodeId node, const std::string& kind, Json info) {
  log_.push_back(
      {now_, next_seq_++, node, node, kind, 0, std::move(info)});
}

bool World::run(uint64_t max_events) {
  uint64_t processed = 0;
  while (!queue_.empty()) {
    if (++processed > max_events) return false;
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.t;
    if (ev.is_timer) {
      log_.push_back({now_, ev.seq, ev.to, ev.to, "timer", 0, Json()});
      if (nodes_[ev.to]) nodes_[ev.to]->on_timer(*this, ev.timer_tag);
    } else {
      log_.push_back({now_, ev.seq, ev.from, ev.to, kind_of(ev.msg),
                      wire_bytes(ev.msg, elem_width, sig_width), Json()});
      if (nodes_[ev.to]) nodes_[ev.to]->on_message(*this, ev.from, ev.msg);
    }
  }
  return true;
}

}  // namespace rpltrail
