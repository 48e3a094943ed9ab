#include "robonet/transport.hpp"

#include <string>

#include "robonet/error.hpp"

namespace robonet {

void Bus::register_agent(AgentId id, std::size_t mailbox_depth) {
  std::lock_guard lock(mu_);
  if (!depth_.emplace(id, mailbox_depth).second)
    throw RegistrationError("agent id " + std::to_string(id) + " already registered on the bus");
}

bool Bus::is_registered(AgentId id) const {
  std::lock_guard lock(mu_);
  return depth_.contains(id);
}

Bus::Mailbox& Bus::box(AgentId self, AgentId from) {
  auto [it, inserted] = boxes_.try_emplace({self, from});
  if (inserted) {
    auto d = depth_.find(self);
    it->second.depth = d == depth_.end() ? 0 : d->second;
  }
  return it->second;
}

void Bus::post(AgentId to, Envelope e, double deliver_at) {
  {
    std::lock_guard lock(mu_);
    if (!depth_.contains(to))
      throw RegistrationError("no agent " + std::to_string(to) + " registered on the bus");
    Mailbox& mb = box(to, e.sender);
    mb.queue.push_back({std::move(e), deliver_at});
    if (mb.depth > 0)
      while (mb.queue.size() > mb.depth) mb.queue.pop_front();
    ++stats_.posted;
  }
  cv_.notify_all();
}

void Bus::note_drop() {
  std::lock_guard lock(mu_);
  ++stats_.dropped;
}

std::optional<Envelope> Bus::take_round_locked(AgentId self, AgentId from, std::uint64_t round) {
  auto it = boxes_.find({self, from});
  if (it == boxes_.end()) return std::nullopt;
  auto& q = it->second.queue;
  for (auto s = q.begin(); s != q.end(); ++s) {
    if (s->env.round == round && visible(*s)) {
      Envelope e = std::move(s->env);
      q.erase(s);
      std::erase_if(q, [&](const Slot& x) { return x.env.round < round && visible(x); });
      ++stats_.delivered;
      return e;
    }
  }
  return std::nullopt;
}

std::optional<Envelope> Bus::take_round(AgentId self, AgentId from, std::uint64_t round) {
  std::lock_guard lock(mu_);
  return take_round_locked(self, from, round);
}

std::optional<Envelope> Bus::wait_round(AgentId self, AgentId from, std::uint64_t round,
                                        std::chrono::duration<double> timeout) {
  std::unique_lock lock(mu_);
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(timeout);
  while (true) {
    if (auto e = take_round_locked(self, from, round)) return e;
    if (cv_.wait_until(lock, deadline) == std::cv_status::timeout)
      return take_round_locked(self, from, round);
  }
}

std::optional<Envelope> Bus::take_newest(AgentId self, AgentId from) {
  std::lock_guard lock(mu_);
  auto it = boxes_.find({self, from});
  if (it == boxes_.end()) return std::nullopt;
  auto& q = it->second.queue;
  for (auto s = q.rbegin(); s != q.rend(); ++s) {
    if (!visible(*s)) continue;
    Envelope e = std::move(s->env);
    q.erase(std::next(s).base());
    ++stats_.delivered;
    return e;
  }
  return std::nullopt;
}

std::size_t Bus::pending(AgentId self, AgentId from) const {
  std::lock_guard lock(mu_);
  auto it = boxes_.find({self, from});
  return it == boxes_.end() ? 0 : it->second.queue.size();
}

double Bus::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void Bus::set_time(double t) {
  {
    std::lock_guard lock(mu_);
    now_ = t;
  }
  cv_.notify_all();
}

BusStats Bus::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

}  // namespace robonet
