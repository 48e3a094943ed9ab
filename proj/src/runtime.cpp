#include "robonet/runtime.hpp"

#include <chrono>
#include <string>

#include "robonet/error.hpp"

namespace robonet {

const char* to_string(JobStatus s) {
  switch (s) {
    case JobStatus::Idle:
      return "idle";
    case JobStatus::Running:
      return "running";
    case JobStatus::Done:
      return "done";
    case JobStatus::Cancelled:
      return "cancelled";
  }
  return "?";
}

OptimizationContext::~OptimizationContext() {
  {
    std::lock_guard lock(mu_);
    if (running_) {
      jobs_[*running_].status = JobStatus::Cancelled;
      running_.reset();
    }
  }
  for (auto& w : workers_) {
    w.thread.request_stop();
    if (w.thread.joinable() && w.thread.get_id() != std::this_thread::get_id()) w.thread.join();
  }
}

void OptimizationContext::reap_finished() {
  const auto self = std::this_thread::get_id();
  std::erase_if(workers_, [&](Worker& w) {
    if (!w.finished->load() || w.thread.get_id() == self) return false;
    w.thread.join();
    return true;
  });
}

std::uint64_t OptimizationContext::submit(JobFn fn) {
  if (!fn) throw InvalidParameterError("empty job");
  std::lock_guard lock(mu_);
  if (running_) throw BusyError("job " + std::to_string(*running_) + " is still running");
  reap_finished();
  const std::uint64_t id = next_id_++;
  jobs_[id].status = JobStatus::Running;
  running_ = id;
  auto finished = std::make_shared<std::atomic<bool>>(false);
  std::jthread th([this, id, fn = std::move(fn), finished](std::stop_token st) {
    Value result;
    try {
      result = fn(st);
    } catch (const std::exception& e) {
      result = Value(ValueMap{{"error", Value(std::string(e.what()))}});
    }
    DoneHook hook;
    bool fire = false;
    {
      std::lock_guard lk(mu_);
      Record& rec = jobs_[id];
      if (rec.status == JobStatus::Running) {
        rec.status = JobStatus::Done;
        rec.result = result;
        running_.reset();
        hook = hook_;
        fire = true;
      }
    }
    cv_.notify_all();
    if (fire && hook) hook(id, result);
    finished->store(true);
  });
  workers_.push_back({std::move(th), std::move(finished)});
  return id;
}

void OptimizationContext::cancel(std::uint64_t job_id) {
  std::lock_guard lock(mu_);
  if (!running_ || *running_ != job_id) {
    auto it = jobs_.find(job_id);
    const std::string state = it == jobs_.end() ? "unknown" : to_string(it->second.status);
    throw StaleJobError("job " + std::to_string(job_id) + " is " + state);
  }
  jobs_[job_id].status = JobStatus::Cancelled;
  running_.reset();
  workers_.back().thread.request_stop();
  cv_.notify_all();
}

void OptimizationContext::on_done(DoneHook hook) {
  std::lock_guard lock(mu_);
  hook_ = std::move(hook);
}

JobStatus OptimizationContext::status(std::uint64_t job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  return it == jobs_.end() ? JobStatus::Idle : it->second.status;
}

std::optional<Value> OptimizationContext::result(std::uint64_t job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second.result;
}

bool OptimizationContext::busy() const {
  std::lock_guard lock(mu_);
  return running_.has_value();
}

void OptimizationContext::wait(std::uint64_t job_id) const {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] {
    auto it = jobs_.find(job_id);
    return it == jobs_.end() || it->second.status != JobStatus::Running;
  });
}

// ---------------------------------------------------------------------------

const char* to_string(AgentRole r) {
  switch (r) {
    case AgentRole::Leader:
      return "leader";
    case AgentRole::Follower:
      return "follower";
    case AgentRole::Generic:
      return "generic";
  }
  return "?";
}

const char* to_string(GuidanceKind g) {
  switch (g) {
    case GuidanceKind::Idle:
      return "idle";
    case GuidanceKind::Rendezvous:
      return "rendezvous";
    case GuidanceKind::Containment:
      return "containment";
    case GuidanceKind::Formation:
      return "formation";
  }
  return "?";
}

const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::SingleIntegrator:
      return "single_integrator";
    case ModelKind::Unicycle:
      return "unicycle";
    case ModelKind::DoubleIntegrator:
      return "double_integrator";
  }
  return "?";
}

void validate_spec(const AgentSpec& spec) {
  auto fail = [&](const std::string& why) {
    throw RegistrationError("agent " + std::to_string(spec.id) + ": " + why);
  };
  const bool state_fits =
      (spec.model == ModelKind::SingleIntegrator && std::holds_alternative<SingleIntState>(spec.initial_state)) ||
      (spec.model == ModelKind::Unicycle && std::holds_alternative<UnicycleState>(spec.initial_state)) ||
      (spec.model == ModelKind::DoubleIntegrator && std::holds_alternative<DoubleIntState>(spec.initial_state));
  if (!state_fits) fail("initial state does not match the model");
  if (!(spec.period > 0.0)) fail("period must be positive");
  if (spec.guidance == GuidanceKind::Idle) return;
  if (spec.model == ModelKind::DoubleIntegrator) fail("velocity guidance cannot drive a double integrator");
  if (spec.model == ModelKind::Unicycle && !spec.use_si_to_unicycle)
    fail(std::string(to_string(spec.guidance)) + " guidance on a unicycle needs the si_to_unicycle mapping");
  if (spec.guidance == GuidanceKind::Containment) {
    if (spec.role == AgentRole::Generic) fail("containment needs a leader or follower role");
    if (!(spec.gain > 0.0)) fail("containment gain must be positive");
  }
  if (spec.guidance == GuidanceKind::Formation && !spec.formation) fail("formation guidance without a formation");
  if (spec.model == ModelKind::SingleIntegrator && spec.guidance == GuidanceKind::Formation &&
      std::get<SingleIntState>(spec.initial_state).pos.size() != 2)
    fail("formation guidance is planar");
}

VelocityLaw make_law(const AgentSpec& spec) {
  switch (spec.guidance) {
    case GuidanceKind::Idle:
      return [](const Vec& own, const NeighborPositions&) { return Vec::Zero(own.size()); };
    case GuidanceKind::Rendezvous:
      return [g = spec.gain](const Vec& own, const NeighborPositions& n) {
        return Vec(g * rendezvous_velocity(own, n));
      };
    case GuidanceKind::Containment:
      return make_containment_law(spec.role == AgentRole::Leader, spec.gain);
    case GuidanceKind::Formation:
      return make_formation_law(*spec.formation, spec.id);
  }
  throw RegistrationError("unknown guidance kind");
}

Vec guided_point(const AgentSpec& spec, const RobotState& s) {
  if (spec.model == ModelKind::Unicycle && spec.use_si_to_unicycle)
    return lookahead_point(std::get<UnicycleState>(s), spec.mapping.lookahead);
  return position_of(s);
}

ControlInput control_input(const AgentSpec& spec, const RobotState& s, const Vec& velocity) {
  switch (spec.model) {
    case ModelKind::SingleIntegrator:
      return VelocityCmd{velocity};
    case ModelKind::Unicycle: {
      if (spec.guidance == GuidanceKind::Idle) return UnicycleCmd{};
      const auto& u = std::get<UnicycleState>(s);
      return si_to_unicycle(Eigen::Vector2d(velocity[0], velocity[1]), u.theta, spec.mapping);
    }
    case ModelKind::DoubleIntegrator:
      return AccelCmd{Vec::Zero(std::get<DoubleIntState>(s).pos.size())};
  }
  throw ModelError("unknown model");
}

AgentHandle::AgentHandle(AgentSpec spec, Communicator comm, SpawnOptions opts)
    : spec_(std::move(spec)),
      comm_(std::move(comm)),
      opts_(opts),
      law_(make_law(spec_)),
      state_(spec_.initial_state) {
  thread_ = std::jthread([this](std::stop_token st) { loop(st); });
}

AgentHandle::~AgentHandle() {
  stop();
  join();
}

void AgentHandle::stop() { thread_.request_stop(); }

void AgentHandle::join() {
  if (thread_.joinable()) thread_.join();
}

RobotState AgentHandle::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

std::vector<double> AgentHandle::period_samples() const {
  std::lock_guard lock(mu_);
  return periods_;
}

std::exception_ptr AgentHandle::error() const {
  std::lock_guard lock(mu_);
  return error_;
}

void AgentHandle::loop(std::stop_token st) {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(spec_.period));
  IntegratorConfig integ = spec_.integrator;
  integ.dt = spec_.period;
  RobotState s = spec_.initial_state;
  auto next = clock::now();
  auto last = next;
  try {
    // Peers may still be spawning; wait until every out-neighbor is on the bus.
    const auto deadline = clock::now() + std::chrono::duration_cast<clock::duration>(
                                             std::chrono::duration<double>(opts_.receive_timeout_s));
    for (AgentId j : comm_.base_neighbors().out) {
      while (!comm_.bus().is_registered(j)) {
        if (st.stop_requested()) break;
        if (clock::now() > deadline)
          throw RegistrationError("agent " + std::to_string(j) + " never joined the bus");
        std::this_thread::sleep_for(std::chrono::microseconds(200));
      }
    }
    next = clock::now();
    last = next;
    for (std::uint64_t round = 0; !st.stop_requested(); ++round) {
      if (opts_.max_rounds > 0 && round >= opts_.max_rounds) break;
      const auto start = clock::now();
      if (round > 0) {
        std::lock_guard lock(mu_);
        periods_.push_back(std::chrono::duration<double>(start - last).count());
      }
      last = start;
      const Vec p = guided_point(spec_, s);
      const Vec v = guidance_step(comm_, p, law_, round, opts_.receive_timeout_s);
      s = step(s, control_input(spec_, s, v), integ);
      {
        std::lock_guard lock(mu_);
        state_ = s;
      }
      rounds_.store(round + 1);
      if (opts_.realtime) {
        next += period;
        std::this_thread::sleep_until(next);
      }
    }
  } catch (...) {
    std::lock_guard lock(mu_);
    error_ = std::current_exception();
  }
  running_.store(false);
}

std::unique_ptr<AgentHandle> spawn_agent(const AgentSpec& spec, std::shared_ptr<Bus> bus,
                                         CommProfile profile, EdgeSchedule schedule,
                                         TransportConfig transport, SpawnOptions opts) {
  validate_spec(spec);
  if (bus->is_registered(spec.id))
    throw RegistrationError("agent id " + std::to_string(spec.id) + " is already on the bus");
  Communicator comm(std::move(bus), spec.id, profile, std::move(schedule), transport);
  return std::make_unique<AgentHandle>(spec, std::move(comm), opts);
}

}  // namespace robonet
