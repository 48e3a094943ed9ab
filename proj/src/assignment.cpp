#include "robonet/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robonet/error.hpp"
#include "robonet/lp.hpp"

namespace robonet {

int assignment_rows(int n) { return 2 * n - 1; }

long SimplexColumn::global_id(int n) const {
  const long m = assignment_rows(n);
  if (artificial()) return task;
  return m + static_cast<long>(robot) * n + task;
}

SimplexColumn make_column(int n, int robot, int task, double cost) {
  SimplexColumn col;
  col.robot = robot;
  col.task = task;
  col.cost = cost;
  col.a.assign(assignment_rows(n), 0.0);
  col.a[robot] = 1.0;
  if (task < n - 1) col.a[n + task] = 1.0;
  return col;
}

SimplexColumn make_artificial(int n, int row) {
  SimplexColumn col;
  col.robot = -1;
  col.task = row;
  col.cost = 0.0;
  col.a.assign(assignment_rows(n), 0.0);
  col.a[row] = 1.0;
  return col;
}

void validate_column(const SimplexColumn& col, int n) {
  const int m = assignment_rows(n);
  if (static_cast<int>(col.a.size()) != m)
    throw ProtocolError("column has " + std::to_string(col.a.size()) + " entries, expected " +
                        std::to_string(m));
  if (!std::isfinite(col.cost)) throw ProtocolError("column cost is not finite");
  SimplexColumn expected;
  if (col.robot == -1) {
    if (col.task < 0 || col.task >= m) throw ProtocolError("artificial column row out of range");
    expected = make_artificial(n, col.task);
    if (col.cost != 0.0) throw ProtocolError("artificial column carries a cost");
  } else {
    if (col.robot < 0 || col.robot >= n || col.task < 0 || col.task >= n)
      throw ProtocolError("column (robot, task) out of range");
    expected = make_column(n, col.robot, col.task, col.cost);
  }
  if (col.a != expected.a) throw ProtocolError("column does not match its incidence structure");
}

SimplexBasis initial_basis(int n) {
  SimplexBasis b;
  for (int r = 0; r < assignment_rows(n); ++r) b.columns.push_back(make_artificial(n, r));
  b.artificial_count = assignment_rows(n);
  b.artificial_weight = assignment_rows(n);
  return b;
}

Eigen::VectorXd costs_from_positions(const Eigen::Vector2d& robot,
                                     const std::vector<Eigen::Vector2d>& tasks) {
  if (tasks.empty()) throw InvalidParameterError("no tasks to cost");
  Eigen::VectorXd c(static_cast<Eigen::Index>(tasks.size()));
  for (std::size_t k = 0; k < tasks.size(); ++k) c[static_cast<Eigen::Index>(k)] = (tasks[k] - robot).norm();
  return c;
}

std::vector<SimplexColumn> local_columns(int robot, const Eigen::VectorXd& costs, int n) {
  if (costs.size() != n) throw ShapeError("cost row length must equal the task count");
  if (robot < 0 || robot >= n) throw InvalidAgentError("robot index outside [0, n)");
  std::vector<SimplexColumn> cols;
  cols.reserve(n);
  for (int k = 0; k < n; ++k) cols.push_back(make_column(n, robot, k, costs[k]));
  return cols;
}

namespace {

int size_from_columns(const SimplexBasis& state) {
  if (state.columns.empty()) throw ProtocolError("empty basis");
  const int m = static_cast<int>(state.columns.front().a.size());
  if (m < 1 || m % 2 == 0) throw ProtocolError("basis column length is not 2n-1");
  return (m + 1) / 2;
}

}  // namespace

SimplexBasis simplex_round(const SimplexBasis& state, const std::vector<SimplexColumn>& own,
                           const std::vector<SimplexColumn>& received) {
  const int n = size_from_columns(state);
  const int m = assignment_rows(n);

  std::map<long, SimplexColumn> pool;
  for (int r = 0; r < m; ++r) pool.emplace(r, make_artificial(n, r));
  for (const auto& c : received) validate_column(c, n);
  for (const auto& c : state.columns) {
    validate_column(c, n);
    pool.emplace(c.global_id(n), c);
  }
  for (const auto& c : own) {
    validate_column(c, n);
    pool.emplace(c.global_id(n), c);
  }
  for (const auto& c : received) pool.emplace(c.global_id(n), c);

  const int P = static_cast<int>(pool.size());
  lp::Matrix A(m, P);
  lp::Vector big(P), cost(P);
  std::vector<long> rank(P);
  std::vector<const SimplexColumn*> cols(P);
  std::map<long, int> position;
  int j = 0;
  for (const auto& [gid, c] : pool) {
    A.col(j) = Eigen::Map<const lp::Vector>(c.a.data(), m);
    big[j] = c.artificial() ? 1.0 : 0.0;
    cost[j] = c.cost;
    rank[j] = gid;
    cols[j] = &c;
    position[gid] = j;
    ++j;
  }
  std::vector<int> start;
  for (const auto& c : state.columns) start.push_back(position.at(c.global_id(n)));
  if (static_cast<int>(start.size()) != m) throw ProtocolError("basis must hold 2n-1 columns");

  lp::SimplexOptions opts;
  opts.lexicographic = true;
  opts.column_rank = rank;
  const lp::Vector b = lp::Vector::Ones(m);
  auto run = lp::optimize_from_basis(A, b, std::vector<lp::Vector>{big, cost}, start, opts);
  if (run.status != lp::LpStatus::Optimal) throw ProtocolError("assignment LP reported unbounded");

  std::sort(run.basis.begin(), run.basis.end());
  const lp::Vector x = lp::basic_solution(A, b, run.basis);
  SimplexBasis out;
  for (int k : run.basis) {
    out.columns.push_back(*cols[k]);
    if (cols[k]->artificial()) {
      if (x[k] > 1e-9) ++out.artificial_count;
      out.artificial_weight += x[k];
    } else {
      out.objective += cost[k] * x[k];
    }
  }
  return out;
}

std::vector<int> basis_permutation(const SimplexBasis& basis, int n) {
  if (basis.artificial_count > 0) throw ProtocolError("basis still relies on artificial columns");
  const int m = assignment_rows(n);
  lp::Matrix B(m, static_cast<Eigen::Index>(basis.columns.size()));
  for (std::size_t k = 0; k < basis.columns.size(); ++k)
    B.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const lp::Vector>(basis.columns[k].a.data(), m);
  const lp::Vector xB = B.fullPivLu().solve(lp::Vector::Ones(m));
  std::vector<int> perm(n, -1);
  for (std::size_t k = 0; k < basis.columns.size(); ++k) {
    const auto& c = basis.columns[k];
    if (c.artificial() || xB[static_cast<Eigen::Index>(k)] < 0.5) continue;
    if (perm[c.robot] >= 0) throw ProtocolError("basis assigns a robot twice");
    perm[c.robot] = c.task;
  }
  for (int t : perm)
    if (t < 0) throw ProtocolError("basis leaves a robot unassigned");
  return perm;
}

Value basis_payload(const SimplexBasis& basis, std::int64_t epoch, bool halted) {
  RealMatrix mat;
  const std::size_t m = basis.columns.empty() ? 0 : basis.columns.front().a.size();
  mat.rows = static_cast<std::uint32_t>(basis.columns.size());
  mat.cols = static_cast<std::uint32_t>(3 + m);
  for (const auto& c : basis.columns) {
    mat.data.push_back(c.robot);
    mat.data.push_back(c.task);
    mat.data.push_back(c.cost);
    mat.data.insert(mat.data.end(), c.a.begin(), c.a.end());
  }
  return Value(ValueMap{{"epoch", Value(epoch)}, {"halted", Value(halted)}, {"basis", Value(mat)}});
}

BasisMessage basis_from_payload(const Value& v, int n) {
  BasisMessage msg;
  try {
    msg.epoch = v.at("epoch").as_int();
    msg.halted = v.at("halted").as<bool>();
    const auto& mat = v.at("basis").as<RealMatrix>();
    const int m = assignment_rows(n);
    if (mat.cols != static_cast<std::uint32_t>(3 + m)) throw ProtocolError("basis matrix width mismatch");
    for (std::uint32_t r = 0; r < mat.rows; ++r) {
      SimplexColumn c;
      c.robot = static_cast<int>(mat(r, 0));
      c.task = static_cast<int>(mat(r, 1));
      c.cost = mat(r, 2);
      for (int k = 0; k < m; ++k) c.a.push_back(mat(r, 3 + k));
      validate_column(c, n);
      msg.columns.push_back(std::move(c));
    }
  } catch (const CodecError& e) {
    throw ProtocolError(std::string("malformed basis message: ") + e.what());
  }
  return msg;
}

int halting_window(int diameter_bound, double drop_prob) {
  const int base = 2 * std::max(1, diameter_bound);
  if (drop_prob <= 0.0) return base;
  if (drop_prob >= 1.0) throw InvalidParameterError("cannot halt reliably when every message drops");
  const int k = static_cast<int>(std::ceil(std::log(1e-6) / std::log(drop_prob)));
  return base * std::max(1, k);
}

DistributedSimplexAgent::DistributedSimplexAgent(AgentId id, int n, Eigen::VectorXd costs,
                                                 const DistributedSimplexOptions& opts,
                                                 std::int64_t epoch)
    : id_(id), n_(n), epoch_(epoch), own_(local_columns(id, costs, n)) {
  const int d = opts.diameter_bound > 0 ? opts.diameter_bound : std::max(1, n - 1);
  window_ = opts.halt_window > 0 ? opts.halt_window : 2 * d;
  max_rounds_ = opts.max_rounds > 0 ? opts.max_rounds : 50 * n;
  basis_ = simplex_round(initial_basis(n), own_, {});
  history_.push_back(basis_.objective);
  artificial_history_.push_back(basis_.artificial_weight);
}

Value DistributedSimplexAgent::outgoing() const { return basis_payload(basis_, epoch_, halted_); }

void DistributedSimplexAgent::absorb(const std::map<AgentId, Value>& messages) {
  if (halted_) return;
  for (const auto& [sender, v] : messages) {
    BasisMessage msg;
    try {
      msg = basis_from_payload(v, n_);
    } catch (const ProtocolError&) {
      ++rejected_;
      continue;
    }
    if (msg.epoch != epoch_) continue;
    heard_.insert_or_assign(sender, std::move(msg.columns));
  }
  std::vector<SimplexColumn> received;
  for (const auto& [sender, cols] : heard_) received.insert(received.end(), cols.begin(), cols.end());
  SimplexBasis next = simplex_round(basis_, own_, received);
  ++rounds_;
  unchanged_ = next == basis_ ? unchanged_ + 1 : 0;
  basis_ = std::move(next);
  history_.push_back(basis_.objective);
  artificial_history_.push_back(basis_.artificial_weight);
  if (unchanged_ >= window_ && basis_.artificial_count == 0) {
    halted_ = true;
    return;
  }
  if (rounds_ >= max_rounds_) {
    throw NonConvergenceError("agent " + std::to_string(id_) + " did not halt within " +
                              std::to_string(max_rounds_) + " rounds (basis objective " +
                              std::to_string(basis_.objective) + ", unchanged for " +
                              std::to_string(unchanged_) + " rounds, " +
                              std::to_string(basis_.artificial_count) + " artificial columns)");
  }
}

std::vector<int> DistributedSimplexAgent::permutation() const { return basis_permutation(basis_, n_); }

int DistributedSimplexAgent::assigned_task() const { return permutation().at(id_); }

DistributedAssignmentResult run_distributed_simplex(Communicator& comm, AgentId self,
                                                    const Eigen::VectorXd& costs, int n,
                                                    const DistributedSimplexOptions& opts) {
  DistributedSimplexAgent agent(self, n, costs, opts);
  const NeighborSets nb = comm.base_neighbors();
  std::set<AgentId> final_in;
  std::set<AgentId> final_delivered;

  for (std::uint64_t round = 0;; ++round) {
    comm.send(agent.outgoing(), nb.out, round);
    if (agent.halted()) {
      if (!comm.reliable()) break;
      const CommGraph& active = comm.active_graph(round);
      for (AgentId j : nb.out)
        if (active.has_edge(self, j)) final_delivered.insert(j);
      const bool ins_done = std::all_of(nb.in.begin(), nb.in.end(),
                                        [&](AgentId j) { return final_in.contains(j); });
      if (ins_done && final_delivered.size() == nb.out.size()) break;
    }

    std::map<AgentId, Value> got;
    if (comm.reliable()) {
      const CommGraph& active = comm.active_graph(round);
      for (AgentId j : nb.in) {
        if (final_in.contains(j) || !active.has_edge(j, self)) continue;
        got.emplace(j, comm.receive(j, round, opts.receive_timeout_s));
      }
    } else {
      got = comm.gather(nb.in, round);
    }
    for (const auto& [j, v] : got)
      if (const Value* h = v.find("halted"); h && h->is<bool>() && h->as<bool>()) final_in.insert(j);
    agent.absorb(got);
  }

  DistributedAssignmentResult out;
  out.permutation = agent.permutation();
  out.task = out.permutation.at(self);
  out.objective = agent.basis().objective;
  out.rounds = agent.rounds();
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Task> CloudState::open_tasks() const {
  std::vector<Task> out;
  for (const auto& t : revealed)
    if (t.state != TaskState::Completed) out.push_back(t);
  return out;
}

CloudState make_cloud(const std::vector<Eigen::Vector2d>& positions, int initial) {
  CloudState cloud;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    Task t{static_cast<int>(k), positions[k], TaskState::Pending, static_cast<int>(k)};
    if (static_cast<int>(k) < initial)
      cloud.revealed.push_back(t);
    else
      cloud.hidden.push_back(t);
  }
  return cloud;
}

CloudUpdate cloud_complete(CloudState cloud, int task_id) {
  auto it = std::find_if(cloud.revealed.begin(), cloud.revealed.end(),
                         [&](const Task& t) { return t.task_id == task_id; });
  if (it == cloud.revealed.end())
    throw CloudError("task " + std::to_string(task_id) + " is not revealed");
  if (it->state == TaskState::Completed)
    throw CloudError("task " + std::to_string(task_id) + " is already completed");
  it->state = TaskState::Completed;
  cloud.completed.insert(task_id);
  CloudUpdate out;
  if (!cloud.hidden.empty()) {
    Task next = cloud.hidden.front();
    cloud.hidden.pop_front();
    cloud.revealed.push_back(next);
    out.revealed = next;
  }
  out.cloud = std::move(cloud);
  return out;
}

Value task_list_payload(const std::vector<Task>& tasks) {
  RealMatrix mat;
  mat.rows = static_cast<std::uint32_t>(tasks.size());
  mat.cols = 3;
  for (const auto& t : tasks) {
    mat.data.push_back(t.task_id);
    mat.data.push_back(t.position.x());
    mat.data.push_back(t.position.y());
  }
  return Value(ValueMap{{"tasks", Value(mat)}});
}

std::vector<Task> task_list_from_payload(const Value& v) {
  const auto& mat = v.at("tasks").as<RealMatrix>();
  if (mat.cols != 3) throw ProtocolError("task list rows must be (id, x, y)");
  std::vector<Task> out;
  for (std::uint32_t r = 0; r < mat.rows; ++r) {
    Task t;
    t.task_id = static_cast<int>(mat(r, 0));
    t.position = {mat(r, 1), mat(r, 2)};
    t.seq = static_cast<int>(r);
    out.push_back(t);
  }
  return out;
}

Value completion_payload(int task_id) { return Value(ValueMap{{"task_id", Value(task_id)}}); }

int completion_from_payload(const Value& v) { return static_cast<int>(v.at("task_id").as_int()); }

}  // namespace robonet
