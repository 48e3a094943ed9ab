#pragma once

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "robonet/codec.hpp"
#include "robonet/netgraph.hpp"
#include "robonet/transport.hpp"

namespace robonet {

/// The three communicator flavours. They share one transport engine and
/// differ only in policy:
///   Static      - fixed graph, reliable, synchronous and asynchronous receive
///   TimeVarying - per-round edge schedule, reliable, sync and async
///   BestEffort  - lossy, asynchronous only, newest-message mailbox
enum class CommProfile { Static, TimeVarying, BestEffort };

const char* to_string(CommProfile p);

/// Graph-scoped messaging endpoint owned by exactly one agent.
class Communicator {
 public:
  /// Registers `self` on the bus. For BestEffort the mailbox keeps only
  /// the newest message per sender unless `mailbox_depth` overrides it.
  Communicator(std::shared_ptr<Bus> bus, AgentId self, CommProfile profile, EdgeSchedule schedule,
               TransportConfig transport = {}, std::optional<std::size_t> mailbox_depth = {});

  static Communicator make_static(std::shared_ptr<Bus> bus, AgentId self, CommGraph graph);
  static Communicator make_time_varying(std::shared_ptr<Bus> bus, AgentId self,
                                        EdgeSchedule schedule);
  static Communicator make_best_effort(std::shared_ptr<Bus> bus, AgentId self,
                                       EdgeSchedule schedule, TransportConfig transport);

  AgentId id() const { return self_; }
  CommProfile profile() const { return profile_; }
  bool reliable() const { return profile_ != CommProfile::BestEffort; }
  const EdgeSchedule& schedule() const { return schedule_; }
  Bus& bus() { return *bus_; }

  /// Edges usable at `round` (the base graph for Static).
  const CommGraph& active_graph(std::uint64_t round);
  NeighborSets base_neighbors() const;

  void send(const Value& v, std::span<const AgentId> to, std::uint64_t round = 0);
  Value receive(AgentId from, std::uint64_t round, double timeout_s);
  std::optional<Value> asynchronous_receive(AgentId from);

  /// Send to out-neighbors, then gather one payload per in-neighbor.
  std::map<AgentId, Value> neighbors_exchange(const Value& v, std::span<const AgentId> in,
                                              std::span<const AgentId> out, std::uint64_t round,
                                              double timeout_s = 5.0);
  /// The gather half of neighbors_exchange, for callers that split the send
  /// and receive phases (lockstep simulation).
  std::map<AgentId, Value> gather(std::span<const AgentId> in, std::uint64_t round,
                                  double timeout_s = 5.0);

 private:
  std::shared_ptr<Bus> bus_;
  AgentId self_;
  CommProfile profile_;
  EdgeSchedule schedule_;
  TransportConfig transport_;
  std::mt19937_64 rng_;
  std::optional<std::uint64_t> cached_round_;
  CommGraph cached_graph_;
};

}  // namespace robonet
