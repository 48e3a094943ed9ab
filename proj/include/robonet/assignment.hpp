#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "robonet/codec.hpp"
#include "robonet/communicator.hpp"
#include "robonet/netgraph.hpp"

namespace robonet {

// ---------------------------------------------------------------------------
// Distributed simplex for the n x n assignment LP.
//
// Rows follow lp::build_assignment_lp: robot rows 0..n-1, then task rows
// n..2n-2 (the last task row is dropped). Every agent also knows the 2n-1
// artificial unit columns; they form the common starting basis and are
// priced in a dominating cost tier, i.e. an exact big-M.

struct SimplexColumn {
  int robot = 0;  // -1 marks an artificial column
  int task = 0;   // task index, or the row of an artificial column
  std::vector<double> a;
  double cost = 0.0;

  bool artificial() const { return robot < 0; }
  /// Position in the global column order shared by all agents.
  long global_id(int n) const;
  bool operator==(const SimplexColumn&) const = default;
};

struct SimplexBasis {
  std::vector<SimplexColumn> columns;  // sorted by (robot, task)
  double objective = 0.0;              // real cost of the basic solution
  int artificial_count = 0;            // artificial columns at a positive level
  double artificial_weight = 0.0;      // sum of artificial levels (big-M tier)

  bool operator==(const SimplexBasis& o) const { return columns == o.columns; }
};

int assignment_rows(int n);
SimplexColumn make_column(int n, int robot, int task, double cost);
SimplexColumn make_artificial(int n, int row);
/// Throws ProtocolError unless the column is well formed for size n.
void validate_column(const SimplexColumn& col, int n);

/// Starting basis: all artificial columns.
SimplexBasis initial_basis(int n);

/// c_ik as Euclidean distance from the robot to each task.
Eigen::VectorXd costs_from_positions(const Eigen::Vector2d& robot, const std::vector<Eigen::Vector2d>& tasks);

/// The n columns (i, k) owned by robot i.
std::vector<SimplexColumn> local_columns(int robot, const Eigen::VectorXd& costs, int n);

/// Lexicographically optimal basis over basis U own U received (plus the
/// artificial columns). Throws ProtocolError on a malformed column.
SimplexBasis simplex_round(const SimplexBasis& state, const std::vector<SimplexColumn>& own,
                           const std::vector<SimplexColumn>& received);

/// Basic solution of the basis as robot -> task; throws if the basis still
/// carries artificial weight.
std::vector<int> basis_permutation(const SimplexBasis& basis, int n);

Value basis_payload(const SimplexBasis& basis, std::int64_t epoch, bool halted);
struct BasisMessage {
  std::vector<SimplexColumn> columns;
  std::int64_t epoch = 0;
  bool halted = false;
};
BasisMessage basis_from_payload(const Value& v, int n);

struct DistributedSimplexOptions {
  /// Bound on the communication graph diameter; <= 0 means n_agents - 1.
  int diameter_bound = 0;
  /// Halt after the basis has been unchanged for this many rounds; <= 0
  /// means 2 * diameter_bound.
  int halt_window = 0;
  /// Round budget; <= 0 means 50 * n_agents.
  int max_rounds = 0;
  double receive_timeout_s = 5.0;
};

/// 2*D rounds, stretched for lossy links so that a neighbour's unchanged
/// basis goes unheard for the whole window with probability <= 1e-6.
int halting_window(int diameter_bound, double drop_prob);

/// Per-agent protocol state. The same object drives the threaded and the
/// lockstep executions: outgoing() produces the round message, absorb()
/// consumes what arrived.
class DistributedSimplexAgent {
 public:
  DistributedSimplexAgent(AgentId id, int n, Eigen::VectorXd costs,
                          const DistributedSimplexOptions& opts, std::int64_t epoch = 0);

  AgentId id() const { return id_; }
  Value outgoing() const;
  /// One round of incoming payloads keyed by sender. The newest valid basis
  /// heard from each sender stays in the pool for later rounds. Malformed
  /// or stale-epoch messages are ignored.
  void absorb(const std::map<AgentId, Value>& messages);

  bool halted() const { return halted_; }
  int rounds() const { return rounds_; }
  int halt_window() const { return window_; }
  int max_rounds() const { return max_rounds_; }
  std::int64_t epoch() const { return epoch_; }
  const SimplexBasis& basis() const { return basis_; }
  const std::vector<double>& objective_history() const { return history_; }
  /// Artificial weight per round; together with objective_history this is
  /// the lexicographic objective the protocol minimises.
  const std::vector<double>& artificial_history() const { return artificial_history_; }
  int rejected_messages() const { return rejected_; }

  /// Valid once halted.
  std::vector<int> permutation() const;
  int assigned_task() const;

 private:
  AgentId id_;
  int n_;
  std::int64_t epoch_;
  std::vector<SimplexColumn> own_;
  SimplexBasis basis_;
  int window_;
  int max_rounds_;
  int unchanged_ = 0;
  int rounds_ = 0;
  bool halted_ = false;
  int rejected_ = 0;
  std::vector<double> history_;
  std::vector<double> artificial_history_;
  std::map<AgentId, std::vector<SimplexColumn>> heard_;
};

struct DistributedAssignmentResult {
  int task = -1;
  double objective = 0.0;  // cost of the agreed permutation
  std::vector<int> permutation;
  int rounds = 0;
};

/// Runs the protocol for agent `self` over `comm` until it halts. Intended
/// for one thread per agent. Works with Static and BestEffort communicators,
/// and with TimeVarying when every agent runs this same routine.
DistributedAssignmentResult run_distributed_simplex(Communicator& comm, AgentId self,
                                                    const Eigen::VectorXd& costs, int n,
                                                    const DistributedSimplexOptions& opts = {});

// ---------------------------------------------------------------------------
// Task cloud

enum class TaskState { Pending, Assigned, Completed };

struct Task {
  int task_id = 0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  TaskState state = TaskState::Pending;
  int seq = 0;  // reveal order
};

struct CloudState {
  std::vector<Task> revealed;
  std::deque<Task> hidden;
  std::set<int> completed;

  /// Revealed tasks that are not completed, in reveal order.
  std::vector<Task> open_tasks() const;
};

/// `initial` tasks are revealed up front, the rest queue up hidden.
CloudState make_cloud(const std::vector<Eigen::Vector2d>& positions, int initial);

struct CloudUpdate {
  CloudState cloud;
  std::optional<Task> revealed;
};

/// Marks `task_id` completed and reveals the next hidden task, if any.
CloudUpdate cloud_complete(CloudState cloud, int task_id);

Value task_list_payload(const std::vector<Task>& tasks);
std::vector<Task> task_list_from_payload(const Value& v);
Value completion_payload(int task_id);
int completion_from_payload(const Value& v);

}  // namespace robonet
