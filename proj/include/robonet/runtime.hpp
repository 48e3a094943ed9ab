#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <thread>
#include <vector>

#include "robonet/codec.hpp"
#include "robonet/communicator.hpp"
#include "robonet/control.hpp"
#include "robonet/dynamics.hpp"
#include "robonet/guidance.hpp"

namespace robonet {

// ---------------------------------------------------------------------------
// Optimization jobs: one optional worker context per agent.

enum class JobStatus { Idle, Running, Done, Cancelled };
const char* to_string(JobStatus s);

using JobFn = std::function<Value(std::stop_token)>;
using DoneHook = std::function<void(std::uint64_t job_id, const Value& result)>;

class OptimizationContext {
 public:
  OptimizationContext() = default;
  OptimizationContext(const OptimizationContext&) = delete;
  OptimizationContext& operator=(const OptimizationContext&) = delete;
  /// Cancels a running job and joins every worker.
  ~OptimizationContext();

  /// Starts `fn` on a worker thread. Throws BusyError while a job runs.
  std::uint64_t submit(JobFn fn);
  /// Requests cancellation; the hook will not fire for this job. Throws
  /// StaleJobError unless `job_id` is the running job.
  void cancel(std::uint64_t job_id);
  /// Fires exactly once per job that finishes without being cancelled, on
  /// the worker thread, after the result is stored.
  void on_done(DoneHook hook);

  JobStatus status(std::uint64_t job_id) const;
  std::optional<Value> result(std::uint64_t job_id) const;
  bool busy() const;
  /// Blocks until the job is no longer running.
  void wait(std::uint64_t job_id) const;

 private:
  struct Record {
    JobStatus status = JobStatus::Idle;
    std::optional<Value> result;
  };
  void reap_finished();

  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::map<std::uint64_t, Record> jobs_;
  std::uint64_t next_id_ = 1;
  std::optional<std::uint64_t> running_;
  DoneHook hook_;
  struct Worker {
    std::jthread thread;
    std::shared_ptr<std::atomic<bool>> finished;
  };
  std::vector<Worker> workers_;
};

// ---------------------------------------------------------------------------
// Agents

enum class AgentRole { Leader, Follower, Generic };
enum class GuidanceKind { Idle, Rendezvous, Containment, Formation };
enum class ModelKind { SingleIntegrator, Unicycle, DoubleIntegrator };

const char* to_string(AgentRole r);
const char* to_string(GuidanceKind g);
const char* to_string(ModelKind m);

struct AgentSpec {
  AgentId id = 0;
  AgentRole role = AgentRole::Generic;
  ModelKind model = ModelKind::SingleIntegrator;
  RobotState initial_state;
  GuidanceKind guidance = GuidanceKind::Idle;
  double gain = 1.0;
  std::optional<FormationSpec> formation;
  /// Unicycles follow planar laws through si_to_unicycle; required for any
  /// non-idle guidance on a unicycle.
  bool use_si_to_unicycle = false;
  SiToUniParams mapping;
  IntegratorConfig integrator;
  double period = 0.01;  // seconds of simulated time per guidance round
};

/// Throws RegistrationError when the guidance kind, role and model do not fit.
void validate_spec(const AgentSpec& spec);

/// Velocity law for the agent's guidance kind.
VelocityLaw make_law(const AgentSpec& spec);

/// The point the guidance layer steers: the position, or the look-ahead point
/// of a mapped unicycle.
Vec guided_point(const AgentSpec& spec, const RobotState& s);

/// Control layer: turns a planar guidance velocity into the model's input.
ControlInput control_input(const AgentSpec& spec, const RobotState& s, const Vec& velocity);

struct SpawnOptions {
  /// Rounds to run; 0 runs until stop().
  std::uint64_t max_rounds = 0;
  /// Pace rounds to `period` of wall-clock time instead of running free.
  bool realtime = false;
  double receive_timeout_s = 5.0;
};

/// A running agent: guidance -> control -> dynamics on its own thread, plus
/// an optimization context.
class AgentHandle {
 public:
  AgentHandle(AgentSpec spec, Communicator comm, SpawnOptions opts);
  AgentHandle(const AgentHandle&) = delete;
  AgentHandle& operator=(const AgentHandle&) = delete;
  ~AgentHandle();

  AgentId id() const { return spec_.id; }
  bool running() const { return running_.load(); }
  void stop();
  void join();

  RobotState state() const;
  std::uint64_t rounds() const { return rounds_.load(); }
  /// Wall-clock seconds between consecutive round starts.
  std::vector<double> period_samples() const;
  /// Exception that ended the loop, if any.
  std::exception_ptr error() const;

  OptimizationContext& optimizer() { return optimizer_; }

 private:
  void loop(std::stop_token st);

  AgentSpec spec_;
  Communicator comm_;
  SpawnOptions opts_;
  VelocityLaw law_;
  mutable std::mutex mu_;
  RobotState state_;
  std::vector<double> periods_;
  std::exception_ptr error_;
  std::atomic<bool> running_{true};
  std::atomic<std::uint64_t> rounds_{0};
  OptimizationContext optimizer_;
  std::jthread thread_;
};

/// Registers the agent on the bus (RegistrationError on a duplicate id or an
/// incompatible spec) and starts its loop.
std::unique_ptr<AgentHandle> spawn_agent(const AgentSpec& spec, std::shared_ptr<Bus> bus,
                                         CommProfile profile, EdgeSchedule schedule,
                                         TransportConfig transport = {}, SpawnOptions opts = {});

}  // namespace robonet
