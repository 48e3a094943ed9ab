#include "robonet/communicator.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "robonet/error.hpp"
#include "robonet/random.hpp"

namespace robonet {

const char* to_string(CommProfile p) {
  switch (p) {
    case CommProfile::Static:
      return "static";
    case CommProfile::TimeVarying:
      return "time_varying";
    case CommProfile::BestEffort:
      return "best_effort";
  }
  return "?";
}

Communicator::Communicator(std::shared_ptr<Bus> bus, AgentId self, CommProfile profile,
                           EdgeSchedule schedule, TransportConfig transport,
                           std::optional<std::size_t> mailbox_depth)
    : bus_(std::move(bus)),
      self_(self),
      profile_(profile),
      schedule_(std::move(schedule)),
      transport_(transport),
      rng_(mix_seed(transport.rng_seed, static_cast<std::uint64_t>(self))) {
  if (self < 0 || self >= schedule_.base().size())
    throw InvalidAgentError("agent " + std::to_string(self) + " outside communication graph");
  if (!(transport_.drop_prob >= 0.0 && transport_.drop_prob <= 1.0))
    throw InvalidParameterError("drop probability must lie in [0,1]");
  if (transport_.latency < 0.0 || transport_.latency_jitter < 0.0)
    throw InvalidParameterError("latency must be non-negative");
  if (reliable() && transport_.drop_prob > 0.0)
    throw InvalidParameterError("reliable communicators cannot drop messages");
  std::size_t depth = mailbox_depth.value_or(profile == CommProfile::BestEffort ? 1 : 0);
  bus_->register_agent(self, depth);
}

Communicator Communicator::make_static(std::shared_ptr<Bus> bus, AgentId self, CommGraph graph) {
  return {std::move(bus), self, CommProfile::Static, EdgeSchedule::always(std::move(graph))};
}

Communicator Communicator::make_time_varying(std::shared_ptr<Bus> bus, AgentId self,
                                             EdgeSchedule schedule) {
  return {std::move(bus), self, CommProfile::TimeVarying, std::move(schedule)};
}

Communicator Communicator::make_best_effort(std::shared_ptr<Bus> bus, AgentId self,
                                            EdgeSchedule schedule, TransportConfig transport) {
  return {std::move(bus), self, CommProfile::BestEffort, std::move(schedule), transport};
}

const CommGraph& Communicator::active_graph(std::uint64_t round) {
  if (profile_ == CommProfile::Static) return schedule_.base();
  if (cached_round_ != round) {
    cached_graph_ = sample_active(schedule_, round);
    cached_round_ = round;
  }
  return cached_graph_;
}

NeighborSets Communicator::base_neighbors() const { return neighbor_sets(schedule_.base(), self_); }

void Communicator::send(const Value& v, std::span<const AgentId> to, std::uint64_t round) {
  if (to.empty()) return;
  const CommGraph& base = schedule_.base();
  for (AgentId j : to) {
    if (j < 0 || j >= base.size() || !base.has_edge(self_, j))
      throw TopologyError("agent " + std::to_string(self_) + " has no edge to " +
                          std::to_string(j));
  }
  const CommGraph& active = active_graph(round);
  Bytes bytes = encode(v);
  const double now = bus_->now();
  for (AgentId j : to) {
    if (!active.has_edge(self_, j)) continue;
    if (transport_.drop_prob > 0.0 && unit_from_bits(rng_()) < transport_.drop_prob) {
      bus_->note_drop();
      continue;
    }
    double delay = transport_.latency;
    if (transport_.latency_jitter > 0.0) delay += transport_.latency_jitter * unit_from_bits(rng_());
    bus_->post(j, Envelope{self_, round, now, bytes}, now + delay);
  }
}

Value Communicator::receive(AgentId from, std::uint64_t round, double timeout_s) {
  if (!reliable())
    throw UnsupportedOperationError("best-effort communicators only support asynchronous receive");
  auto env = bus_->wait_round(self_, from, round, std::chrono::duration<double>(timeout_s));
  if (!env)
    throw TimeoutError("timed out waiting for agent " + std::to_string(from) + " round " +
                           std::to_string(round),
                       {from}, round);
  return decode(env->payload);
}

std::optional<Value> Communicator::asynchronous_receive(AgentId from) {
  auto env = bus_->take_newest(self_, from);
  if (!env) return std::nullopt;
  return decode(env->payload);
}

std::map<AgentId, Value> Communicator::gather(std::span<const AgentId> in, std::uint64_t round,
                                              double timeout_s) {
  std::map<AgentId, Value> out;
  if (!reliable()) {
    for (AgentId j : in)
      if (auto v = asynchronous_receive(j)) out.emplace(j, std::move(*v));
    return out;
  }
  const CommGraph& active = active_graph(round);
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
  std::vector<AgentId> missing;
  for (AgentId j : in) {
    if (!active.has_edge(j, self_)) continue;
    auto left = std::chrono::duration<double>(deadline - std::chrono::steady_clock::now());
    auto env = bus_->wait_round(self_, j, round, std::max(left, std::chrono::duration<double>(0)));
    if (!env) {
      missing.push_back(j);
      continue;
    }
    out.emplace(j, decode(env->payload));
  }
  if (!missing.empty()) {
    std::string who;
    for (AgentId j : missing) who += (who.empty() ? "" : ",") + std::to_string(j);
    throw TimeoutError("exchange round " + std::to_string(round) + " missing senders [" + who + "]",
                       missing, round);
  }
  return out;
}

std::map<AgentId, Value> Communicator::neighbors_exchange(const Value& v,
                                                          std::span<const AgentId> in,
                                                          std::span<const AgentId> out,
                                                          std::uint64_t round, double timeout_s) {
  send(v, out, round);
  return gather(in, round, timeout_s);
}

}  // namespace robonet
