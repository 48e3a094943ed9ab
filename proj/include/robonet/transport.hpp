#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <utility>

#include "robonet/codec.hpp"
#include "robonet/netgraph.hpp"

namespace robonet {

/// Link behaviour applied by a sender. Drop and jitter draws come from a
/// per-sender generator seeded from (rng_seed, sender).
struct TransportConfig {
  double drop_prob = 0.0;
  double latency = 0.0;         // seconds of simulated time
  double latency_jitter = 0.0;  // extra uniform [0, jitter) per message
  std::uint64_t rng_seed = 0;
};

struct BusStats {
  std::uint64_t posted = 0;
  std::uint64_t dropped = 0;
  std::uint64_t delivered = 0;
};

/// In-process message bus: one mailbox per (receiver, sender) link. Safe for
/// concurrent posting and receiving from many agent contexts. The bus also
/// holds the simulated clock used for time stamps and latency.
class Bus {
 public:
  /// `mailbox_depth` 0 keeps every message; k > 0 keeps the newest k.
  void register_agent(AgentId id, std::size_t mailbox_depth = 0);
  bool is_registered(AgentId id) const;

  void post(AgentId to, Envelope e, double deliver_at);
  void note_drop();

  /// Oldest visible envelope from `from` carrying round tag `round`. Older
  /// round tags from the same sender are discarded on the way.
  std::optional<Envelope> take_round(AgentId self, AgentId from, std::uint64_t round);
  std::optional<Envelope> wait_round(AgentId self, AgentId from, std::uint64_t round,
                                     std::chrono::duration<double> timeout);
  /// Newest visible envelope from `from`; older ones stay queued.
  std::optional<Envelope> take_newest(AgentId self, AgentId from);
  std::size_t pending(AgentId self, AgentId from) const;

  double now() const;
  void set_time(double t);

  BusStats stats() const;

 private:
  struct Slot {
    Envelope env;
    double deliver_at;
  };
  struct Mailbox {
    std::size_t depth = 0;
    std::deque<Slot> queue;
  };

  bool visible(const Slot& s) const { return s.deliver_at <= now_ + 1e-12; }
  std::optional<Envelope> take_round_locked(AgentId self, AgentId from, std::uint64_t round);
  Mailbox& box(AgentId self, AgentId from);

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<AgentId, std::size_t> depth_;
  std::map<std::pair<AgentId, AgentId>, Mailbox> boxes_;
  double now_ = 0.0;
  BusStats stats_;
};

}  // namespace robonet
