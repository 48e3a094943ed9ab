#pragma once

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "robonet/communicator.hpp"
#include "robonet/lp.hpp"
#include "robonet/netgraph.hpp"

namespace robonet {

/// x(t+1) = A x(t) + B u(t),  z(t) = C x(t) + D u(t).
struct LinearAgentModel {
  Eigen::MatrixXd A, B, C, D;
  Eigen::VectorXd x0;

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
  int nz() const { return static_cast<int>(C.rows()); }
  /// Throws ShapeError on inconsistent dimensions.
  void validate() const;
};

/// {v : G v <= g}. Zero rows means the whole space.
struct Polyhedron {
  Eigen::MatrixXd G;
  Eigen::VectorXd g;

  static Polyhedron whole(int dim);
  static Polyhedron box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  int dim() const { return static_cast<int>(G.cols()); }
  bool vacuous() const { return G.rows() == 0; }
  /// Largest violation max(G v - g), or -inf with no rows.
  double residual(const Eigen::VectorXd& v) const;
};

struct OcpSpec {
  LinearAgentModel model;
  int T = 1;
  Polyhedron X, U;
  Polyhedron S;  // coupling set on the summed outputs
  /// Stage cost sum_k q_k |x_k - x_ref_k| + sum_k r_k |u_k - u_ref_k|.
  Eigen::VectorXd q, r, x_ref, u_ref;
  /// Terminal equilibrium: x_bar = A x_bar + B u_bar.
  Eigen::VectorXd x_bar, u_bar;

  /// Shape and equilibrium checks; throws ShapeError or PlanError.
  void validate() const;
};

struct Plan {
  Eigen::MatrixXd states;   // (T+1) x nx
  Eigen::MatrixXd inputs;   // T x nu
  Eigen::MatrixXd outputs;  // T x nz
  double cost = 0.0;
};

/// Sum over t < T of the stage cost.
double plan_cost(const OcpSpec& spec, const Plan& plan);
/// Rebuilds states from the first state and the inputs, plus outputs and cost.
Plan rollout(const OcpSpec& spec, const Eigen::VectorXd& x_init, const Eigen::MatrixXd& inputs);
/// Max dynamics mismatch |x(t+1) - A x(t) - B u(t)|.
double dynamics_residual(const OcpSpec& spec, const Plan& plan);
/// Local feasibility: dynamics, X, U and the terminal equality, within tol.
bool locally_feasible(const OcpSpec& spec, const Plan& plan, double tol = 1e-9);

struct LocalOcp {
  lp::LpBuilder builder;
  lp::StandardLP lp;
  std::vector<int> x_var;  // (t-1) * nx + k for t = 1..T
  std::vector<int> u_var;  // t * nu + k for t = 0..T-1
};

/// LP for one agent from state `x_init` given the others' summed outputs
/// (T x nz). Epigraph variables carry the 1-norm stage cost.
LocalOcp build_local_ocp(const OcpSpec& spec, const Eigen::MatrixXd& others_output_sum,
                         const Eigen::VectorXd& x_init);
/// Same, starting from spec.model.x0.
LocalOcp build_local_ocp(const OcpSpec& spec, const Eigen::MatrixXd& others_output_sum);

/// Solves the local LP; nullopt when infeasible.
std::optional<Plan> solve_local_ocp(const OcpSpec& spec, const Eigen::MatrixXd& others_output_sum,
                                    const Eigen::VectorXd& x_init);

/// Drops step 0 and appends the terminal equilibrium. Throws PlanError if
/// the plan is not dynamically consistent or does not end at x_bar.
Plan shift_plan(const Plan& p, const OcpSpec& spec);

/// max_t of H (sum_i z_i(t)) - h over the horizon; -inf if S is vacuous.
double coupling_residual(const std::vector<OcpSpec>& specs, const std::vector<Plan>& plans);
/// Residual of a single summed output.
double coupling_residual_at(const Polyhedron& S, const Eigen::VectorXd& z_sum);

struct ReplanOutcome {
  Plan plan;
  bool accepted = false;   // new plan replaced the old one
  bool infeasible = false;  // local LP had no solution; old plan kept
};

/// One agent's replanning against the others' summed outputs. The new plan
/// is kept only if its cost does not exceed the current plan's.
ReplanOutcome replan(const OcpSpec& spec, const Plan& current, const Eigen::MatrixXd& others_output_sum);

/// Agent `turn` replans; all other plans are returned unchanged. Throws
/// FeasibilityError if the incoming plans are not jointly feasible.
std::vector<Plan> mpc_round(const std::vector<OcpSpec>& specs, const std::vector<Plan>& plans,
                            int turn);

struct MpcWorld {
  std::vector<OcpSpec> specs;
  std::vector<Eigen::VectorXd> states;
  std::vector<Plan> plans;
  std::vector<int> order;  // replanning order; empty means 0..N-1
  int step = 0;
};

struct MpcStepResult {
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> outputs;
  std::vector<Eigen::VectorXd> next_states;
  int turn = 0;
  bool accepted = false;
  double applied_residual = 0.0;  // coupling residual of the applied outputs
};

/// One closed-loop step: replan (round robin), apply first inputs, shift.
MpcStepResult mpc_step(MpcWorld& world);

/// Joint LP over all agents with the coupling constraint, minimising the
/// summed cost. Test and scenario scaffolding for feasible initial plans;
/// not part of the distributed protocol. Throws FeasibilityError.
std::vector<Plan> bootstrap_joint_plans(const std::vector<OcpSpec>& specs);

// ---------------------------------------------------------------------------
// Message-passing execution: each agent keeps the latest output plans
// broadcast by the others and only ever reads them from its communicator.

Value plan_payload(AgentId agent, int step, const Eigen::MatrixXd& outputs);
struct PlanMessage {
  AgentId agent = 0;
  int step = 0;
  Eigen::MatrixXd outputs;
};
PlanMessage plan_from_payload(const Value& v);

class DistributedMpcAgent {
 public:
  DistributedMpcAgent(AgentId id, OcpSpec spec, Plan initial);

  AgentId id() const { return id_; }
  const OcpSpec& spec() const { return spec_; }
  const Plan& plan() const { return plan_; }
  const Eigen::VectorXd& state() const { return x_; }

  Value broadcast(int step) const;
  /// Stores the newest plan heard from each sender.
  void absorb(const std::map<AgentId, Value>& messages);
  /// Sum of the stored output plans of all other agents.
  Eigen::MatrixXd others_output_sum() const;
  ReplanOutcome replan_now();
  /// Applies the first planned input, advances the state, shifts the plan.
  /// Returns (input, output).
  std::pair<Eigen::VectorXd, Eigen::VectorXd> apply();

 private:
  AgentId id_;
  OcpSpec spec_;
  Plan plan_;
  Eigen::VectorXd x_;
  std::map<AgentId, Eigen::MatrixXd> others_;
};

struct MpcTraceRow {
  int step = 0;
  AgentId agent = 0;
  Eigen::VectorXd state, input, output;
  double coupling_residual = 0.0;
};

struct DistributedMpcResult {
  std::vector<MpcTraceRow> rows;
  std::vector<std::vector<Eigen::VectorXd>> states;  // [step][agent], step 0 = initial
  double max_applied_residual = -std::numeric_limits<double>::infinity();
  double closed_loop_cost = 0.0;
  bool recursively_feasible = true;
};

/// Lockstep closed loop over reliable communicators on a complete graph.
DistributedMpcResult run_distributed_mpc(const std::vector<OcpSpec>& specs,
                                         const std::vector<Plan>& initial_plans, int steps,
                                         std::vector<int> order = {});

}  // namespace robonet
