#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "robonet/assignment.hpp"
#include "robonet/communicator.hpp"
#include "robonet/control.hpp"
#include "robonet/dynamics.hpp"
#include "robonet/lockstep.hpp"
#include "robonet/netgraph.hpp"
#include "robonet/transport.hpp"

namespace robonet {

// ---------------------------------------------------------------------------
// Lockstep distributed simplex: every agent publishes, then every agent
// gathers and pivots, once per round.

struct LockstepAssignmentConfig {
  CommProfile profile = CommProfile::Static;
  EdgeSchedule schedule;
  TransportConfig transport;
  DistributedSimplexOptions options;
  Execution execution = Execution::Serial;
};

struct LockstepAssignmentResult {
  std::vector<int> permutation;            // agreed robot -> task
  std::vector<std::vector<int>> per_agent;  // each agent's own view
  std::vector<int> halted_at;               // round at which each agent halted
  std::vector<std::vector<double>> objective_histories;
  double objective = 0.0;
  int rounds = 0;
  bool consensus = false;
  BusStats stats;
};

/// Row i of `costs` is known only to agent i.
LockstepAssignmentResult solve_assignment_lockstep(const Eigen::MatrixXd& costs,
                                                   const LockstepAssignmentConfig& cfg);

// ---------------------------------------------------------------------------
// Dynamic task flow: a cloud reveals tasks one-in-one-out, robots re-run the
// distributed simplex on every task-list broadcast while they keep driving.

struct GanttRow {
  int task_id = 0;
  double reveal_time = 0.0;
  double assign_time = 0.0;
  int robot = -1;
  double complete_time = 0.0;
};

enum class TaskEventKind { Reveal, Assign, Complete, Broadcast };
const char* to_string(TaskEventKind k);

struct TaskEvent {
  double time = 0.0;
  TaskEventKind kind = TaskEventKind::Reveal;
  int task_id = -1;  // -1 for broadcasts
  int robot = -1;    // -1 for cloud-side events
  std::int64_t epoch = 0;
};

struct TaskFlowConfig {
  std::vector<UnicycleState> robots;
  std::vector<Eigen::Vector2d> tasks;  // reveal order
  int initial_tasks = 0;               // <= 0 means one per robot
  CommGraph graph;                     // robot-to-robot links
  DistributedSimplexOptions options;
  TrackerGains tracker;
  IntegratorConfig integrator;
  double max_time = 600.0;
  Execution execution = Execution::Serial;
};

struct TaskFlowResult {
  std::vector<GanttRow> gantt;  // ordered by completion
  std::vector<TaskEvent> events;
  std::vector<UnicycleState> final_states;
  std::vector<std::vector<int>> epoch_assignments;  // task ids per robot, per epoch
  std::vector<double> epoch_costs;                  // agreed objective per epoch
  std::vector<double> epoch_optimal_costs;          // Hungarian objective per epoch
  int epochs = 0;
  double end_time = 0.0;
  bool all_completed = false;
};

/// Handed to the observer after every tick; `progress` holds the events and
/// epochs recorded so far. The last call, after the final completion, has
/// no robot data.
struct TaskFlowSnapshot {
  double time = 0.0;
  const std::vector<UnicycleState>* robots = nullptr;
  const std::vector<int>* targets = nullptr;  // task id or -1
  const TaskFlowResult* progress = nullptr;
};

using TaskFlowObserver = std::function<void(const TaskFlowSnapshot&)>;

/// Runs until every task is completed or max_time elapses.
TaskFlowResult dynamic_assignment_loop(const TaskFlowConfig& cfg,
                                       const TaskFlowObserver& observer = {});

}  // namespace robonet
