#include "robonet/mpc.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "robonet/error.hpp"
#include "robonet/transport.hpp"

namespace robonet {

using lp::LpBuilder;
using lp::Sense;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

double stage_cost(const OcpSpec& s, const VectorXd& x, const VectorXd& u) {
  return (s.q.array() * (x - s.x_ref).array().abs()).sum() +
         (s.r.array() * (u - s.u_ref).array().abs()).sum();
}

struct Affine {
  std::vector<LpBuilder::Term> terms;
  double constant = 0.0;
};

struct Block {
  std::vector<int> x_var;
  std::vector<int> u_var;
  std::vector<std::vector<Affine>> z;  // [t][output row]
};

Block add_agent(LpBuilder& b, const OcpSpec& s, const VectorXd& x0) {
  const int nx = s.model.nx(), nu = s.model.nu(), nz = s.model.nz(), T = s.T;
  Block blk;
  for (int t = 1; t <= T; ++t)
    for (int k = 0; k < nx; ++k) blk.x_var.push_back(b.add_variable(0.0, true));
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < nu; ++k) blk.u_var.push_back(b.add_variable(0.0, true));
  auto xv = [&](int t, int k) { return blk.x_var[(t - 1) * nx + k]; };
  auto uv = [&](int t, int k) { return blk.u_var[t * nu + k]; };

  // Stage cost epigraphs; the t = 0 state term is a constant.
  for (int k = 0; k < nx; ++k) b.add_constant(s.q[k] * std::abs(x0[k] - s.x_ref[k]));
  for (int t = 1; t < T; ++t) {
    for (int k = 0; k < nx; ++k) {
      if (s.q[k] == 0.0) continue;
      const int e = b.add_variable(1.0, false);
      b.add_row({{xv(t, k), s.q[k]}, {e, -1.0}}, Sense::LessEqual, s.q[k] * s.x_ref[k]);
      b.add_row({{xv(t, k), -s.q[k]}, {e, -1.0}}, Sense::LessEqual, -s.q[k] * s.x_ref[k]);
    }
  }
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < nu; ++k) {
      if (s.r[k] == 0.0) continue;
      const int e = b.add_variable(1.0, false);
      b.add_row({{uv(t, k), s.r[k]}, {e, -1.0}}, Sense::LessEqual, s.r[k] * s.u_ref[k]);
      b.add_row({{uv(t, k), -s.r[k]}, {e, -1.0}}, Sense::LessEqual, -s.r[k] * s.u_ref[k]);
    }
  }

  // Dynamics.
  const auto& A = s.model.A;
  const auto& B = s.model.B;
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < nx; ++k) {
      std::vector<LpBuilder::Term> row{{xv(t + 1, k), 1.0}};
      double rhs = 0.0;
      for (int j = 0; j < nx; ++j) {
        if (A(k, j) == 0.0) continue;
        if (t == 0)
          rhs += A(k, j) * x0[j];
        else
          row.emplace_back(xv(t, j), -A(k, j));
      }
      for (int j = 0; j < nu; ++j)
        if (B(k, j) != 0.0) row.emplace_back(uv(t, j), -B(k, j));
      b.add_row(row, Sense::Equal, rhs);
    }
  }

  // Local sets and terminal equality.
  for (int t = 1; t <= T; ++t) {
    for (Eigen::Index r = 0; r < s.X.G.rows(); ++r) {
      std::vector<LpBuilder::Term> row;
      for (int k = 0; k < nx; ++k)
        if (s.X.G(r, k) != 0.0) row.emplace_back(xv(t, k), s.X.G(r, k));
      b.add_row(row, Sense::LessEqual, s.X.g[r]);
    }
  }
  for (int t = 0; t < T; ++t) {
    for (Eigen::Index r = 0; r < s.U.G.rows(); ++r) {
      std::vector<LpBuilder::Term> row;
      for (int k = 0; k < nu; ++k)
        if (s.U.G(r, k) != 0.0) row.emplace_back(uv(t, k), s.U.G(r, k));
      b.add_row(row, Sense::LessEqual, s.U.g[r]);
    }
  }
  for (int k = 0; k < nx; ++k) b.add_row({{xv(T, k), 1.0}}, Sense::Equal, s.x_bar[k]);

  // Output expressions.
  const auto& C = s.model.C;
  const auto& D = s.model.D;
  blk.z.assign(T, std::vector<Affine>(nz));
  for (int t = 0; t < T; ++t) {
    for (int r = 0; r < nz; ++r) {
      Affine& a = blk.z[t][r];
      for (int k = 0; k < nx; ++k) {
        if (C(r, k) == 0.0) continue;
        if (t == 0)
          a.constant += C(r, k) * x0[k];
        else
          a.terms.emplace_back(xv(t, k), C(r, k));
      }
      for (int k = 0; k < nu; ++k)
        if (D(r, k) != 0.0) a.terms.emplace_back(uv(t, k), D(r, k));
    }
  }
  return blk;
}

/// H_row . (sum of blocks' z(t) + extra(t)) <= h_row for every t and row.
void add_coupling(LpBuilder& b, const Polyhedron& S, const std::vector<const Block*>& blocks,
                  const MatrixXd& extra, int T) {
  for (int t = 0; t < T; ++t) {
    for (Eigen::Index h = 0; h < S.G.rows(); ++h) {
      std::vector<LpBuilder::Term> row;
      double rhs = S.g[h];
      for (Eigen::Index r = 0; r < S.G.cols(); ++r) {
        const double w = S.G(h, r);
        if (w == 0.0) continue;
        rhs -= w * extra(t, r);
        for (const Block* blk : blocks) {
          const Affine& a = blk->z[t][r];
          rhs -= w * a.constant;
          for (const auto& [j, c] : a.terms) row.emplace_back(j, w * c);
        }
      }
      if (row.empty()) {
        if (rhs < -1e-12) throw FeasibilityError("coupling constraint violated by fixed outputs");
        continue;
      }
      b.add_row(row, Sense::LessEqual, rhs);
    }
  }
}

Plan extract(const OcpSpec& s, const Block& blk, const VectorXd& vars, const VectorXd& x0) {
  const int nx = s.model.nx(), nu = s.model.nu(), T = s.T;
  Plan p;
  p.states.resize(T + 1, nx);
  p.inputs.resize(T, nu);
  p.states.row(0) = x0.transpose();
  for (int t = 1; t <= T; ++t)
    for (int k = 0; k < nx; ++k) p.states(t, k) = vars[blk.x_var[(t - 1) * nx + k]];
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < nu; ++k) p.inputs(t, k) = vars[blk.u_var[t * nu + k]];
  p.outputs = p.states.topRows(T) * s.model.C.transpose() + p.inputs * s.model.D.transpose();
  p.cost = plan_cost(s, p);
  return p;
}

MatrixXd output_sum(const std::vector<OcpSpec>& specs, const std::vector<Plan>& plans, int skip) {
  const int T = specs.front().T, nz = specs.front().model.nz();
  MatrixXd sum = MatrixXd::Zero(T, nz);
  for (std::size_t i = 0; i < plans.size(); ++i)
    if (static_cast<int>(i) != skip) sum += plans[i].outputs;
  return sum;
}

}  // namespace

void LinearAgentModel::validate() const {
  require(A.rows() == A.cols() && A.rows() > 0, "A must be square and non-empty");
  require(B.rows() == A.rows() && B.cols() > 0, "B must have nx rows");
  require(C.cols() == A.rows() && C.rows() > 0, "C must have nx columns");
  require(D.rows() == C.rows() && D.cols() == B.cols(), "D must be nz x nu");
  require(x0.size() == A.rows(), "x0 must have nx entries");
}

Polyhedron Polyhedron::whole(int dim) { return {MatrixXd::Zero(0, dim), VectorXd::Zero(0)}; }

Polyhedron Polyhedron::box(const VectorXd& lo, const VectorXd& hi) {
  require(lo.size() == hi.size(), "box bounds differ in length");
  const auto d = lo.size();
  std::vector<std::pair<int, double>> rows;  // (+/- (k+1), bound)
  for (Eigen::Index k = 0; k < d; ++k) {
    if (std::isfinite(hi[k])) rows.emplace_back(static_cast<int>(k) + 1, hi[k]);
    if (std::isfinite(lo[k])) rows.emplace_back(-static_cast<int>(k) - 1, -lo[k]);
  }
  Polyhedron p{MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), d),
               VectorXd::Zero(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int k = std::abs(rows[r].first) - 1;
    p.G(static_cast<Eigen::Index>(r), k) = rows[r].first > 0 ? 1.0 : -1.0;
    p.g[static_cast<Eigen::Index>(r)] = rows[r].second;
  }
  return p;
}

double Polyhedron::residual(const VectorXd& v) const {
  if (vacuous()) return kNegInf;
  return (G * v - g).maxCoeff();
}

void OcpSpec::validate() const {
  model.validate();
  const int nx = model.nx(), nu = model.nu(), nz = model.nz();
  require(T >= 1, "horizon must be at least one step");
  require(X.dim() == nx && X.G.rows() == X.g.size(), "X has the wrong dimension");
  require(U.dim() == nu && U.G.rows() == U.g.size(), "U has the wrong dimension");
  require(S.dim() == nz && S.G.rows() == S.g.size(), "S has the wrong dimension");
  require(q.size() == nx && x_ref.size() == nx && x_bar.size() == nx, "state weights/references need nx entries");
  require(r.size() == nu && u_ref.size() == nu && u_bar.size() == nu, "input weights/references need nu entries");
  require((q.array() >= 0).all() && (r.array() >= 0).all(), "cost weights must be non-negative");
  if ((model.A * x_bar + model.B * u_bar - x_bar).cwiseAbs().maxCoeff() > 1e-9)
    throw PlanError("terminal pair is not an equilibrium");
  if (X.residual(x_bar) > 1e-9 || U.residual(u_bar) > 1e-9)
    throw PlanError("terminal pair violates the local constraint sets");
}

double plan_cost(const OcpSpec& spec, const Plan& plan) {
  double c = 0.0;
  for (int t = 0; t < spec.T; ++t)
    c += stage_cost(spec, plan.states.row(t).transpose(), plan.inputs.row(t).transpose());
  return c;
}

Plan rollout(const OcpSpec& spec, const VectorXd& x_init, const MatrixXd& inputs) {
  require(inputs.rows() == spec.T && inputs.cols() == spec.model.nu(), "input plan has the wrong shape");
  Plan p;
  p.inputs = inputs;
  p.states.resize(spec.T + 1, spec.model.nx());
  p.states.row(0) = x_init.transpose();
  for (int t = 0; t < spec.T; ++t)
    p.states.row(t + 1) =
        (spec.model.A * p.states.row(t).transpose() + spec.model.B * inputs.row(t).transpose()).transpose();
  p.outputs = p.states.topRows(spec.T) * spec.model.C.transpose() + p.inputs * spec.model.D.transpose();
  p.cost = plan_cost(spec, p);
  return p;
}

double dynamics_residual(const OcpSpec& spec, const Plan& plan) {
  double worst = 0.0;
  for (int t = 0; t < spec.T; ++t) {
    const VectorXd pred =
        spec.model.A * plan.states.row(t).transpose() + spec.model.B * plan.inputs.row(t).transpose();
    worst = std::max(worst, (plan.states.row(t + 1).transpose() - pred).cwiseAbs().maxCoeff());
  }
  return worst;
}

bool locally_feasible(const OcpSpec& spec, const Plan& plan, double tol) {
  if (plan.states.rows() != spec.T + 1 || plan.inputs.rows() != spec.T) return false;
  if (dynamics_residual(spec, plan) > tol) return false;
  for (int t = 1; t <= spec.T; ++t)
    if (spec.X.residual(plan.states.row(t).transpose()) > tol) return false;
  for (int t = 0; t < spec.T; ++t)
    if (spec.U.residual(plan.inputs.row(t).transpose()) > tol) return false;
  return (plan.states.row(spec.T).transpose() - spec.x_bar).cwiseAbs().maxCoeff() <= tol;
}

LocalOcp build_local_ocp(const OcpSpec& spec, const MatrixXd& others_output_sum, const VectorXd& x_init) {
  spec.validate();
  require(others_output_sum.rows() == spec.T && others_output_sum.cols() == spec.model.nz(),
          "others' output sum must be T x nz");
  require(x_init.size() == spec.model.nx(), "initial state must have nx entries");
  if (!others_output_sum.allFinite()) throw NumericError("others' output sum is not finite");
  LocalOcp ocp;
  Block blk = add_agent(ocp.builder, spec, x_init);
  add_coupling(ocp.builder, spec.S, {&blk}, others_output_sum, spec.T);
  ocp.x_var = blk.x_var;
  ocp.u_var = blk.u_var;
  ocp.lp = ocp.builder.build();
  return ocp;
}

LocalOcp build_local_ocp(const OcpSpec& spec, const MatrixXd& others_output_sum) {
  return build_local_ocp(spec, others_output_sum, spec.model.x0);
}

std::optional<Plan> solve_local_ocp(const OcpSpec& spec, const MatrixXd& others_output_sum,
                                    const VectorXd& x_init) {
  LocalOcp ocp;
  try {
    ocp = build_local_ocp(spec, others_output_sum, x_init);
  } catch (const FeasibilityError&) {
    return std::nullopt;
  }
  const auto sol = lp::solve_lp(ocp.lp);
  if (sol.status == lp::LpStatus::Infeasible) return std::nullopt;
  if (sol.status != lp::LpStatus::Optimal) throw NumericError("local control problem is unbounded");
  Block blk{ocp.x_var, ocp.u_var, {}};
  return extract(spec, blk, ocp.builder.recover(sol.x), x_init);
}

Plan shift_plan(const Plan& p, const OcpSpec& spec) {
  const int T = spec.T;
  if (p.states.rows() != T + 1 || p.inputs.rows() != T) throw PlanError("plan has the wrong horizon");
  if (dynamics_residual(spec, p) > 1e-9) throw PlanError("plan violates the dynamics");
  if ((p.states.row(T).transpose() - spec.x_bar).cwiseAbs().maxCoeff() > 1e-9)
    throw PlanError("plan does not end at the terminal equilibrium");
  Plan s;
  s.states.resize(T + 1, spec.model.nx());
  s.inputs.resize(T, spec.model.nu());
  s.states.topRows(T) = p.states.bottomRows(T);
  s.states.row(T) = spec.x_bar.transpose();
  if (T > 1) s.inputs.topRows(T - 1) = p.inputs.bottomRows(T - 1);
  s.inputs.row(T - 1) = spec.u_bar.transpose();
  s.outputs = s.states.topRows(T) * spec.model.C.transpose() + s.inputs * spec.model.D.transpose();
  s.cost = plan_cost(spec, s);
  return s;
}

double coupling_residual_at(const Polyhedron& S, const VectorXd& z_sum) { return S.residual(z_sum); }

double coupling_residual(const std::vector<OcpSpec>& specs, const std::vector<Plan>& plans) {
  if (specs.empty() || specs.size() != plans.size()) throw ShapeError("one plan per agent required");
  const MatrixXd sum = output_sum(specs, plans, -1);
  double worst = kNegInf;
  for (int t = 0; t < specs.front().T; ++t)
    worst = std::max(worst, coupling_residual_at(specs.front().S, sum.row(t).transpose()));
  return worst;
}

ReplanOutcome replan(const OcpSpec& spec, const Plan& current, const MatrixXd& others_output_sum) {
  ReplanOutcome out{current, false, false};
  auto fresh = solve_local_ocp(spec, others_output_sum, current.states.row(0).transpose());
  if (!fresh) {
    out.infeasible = true;
    return out;
  }
  const double old_cost = plan_cost(spec, current);
  if (fresh->cost <= old_cost + 1e-9 * std::max(1.0, std::abs(old_cost))) {
    out.plan = std::move(*fresh);
    out.accepted = true;
  }
  return out;
}

std::vector<Plan> mpc_round(const std::vector<OcpSpec>& specs, const std::vector<Plan>& plans, int turn) {
  if (turn < 0 || turn >= static_cast<int>(specs.size())) throw InvalidAgentError("replanning turn out of range");
  if (coupling_residual(specs, plans) > 1e-8) throw FeasibilityError("plans are not jointly feasible");
  std::vector<Plan> next = plans;
  next[turn] = replan(specs[turn], plans[turn], output_sum(specs, plans, turn)).plan;
  return next;
}

MpcStepResult mpc_step(MpcWorld& world) {
  const int n = static_cast<int>(world.specs.size());
  if (n == 0 || world.plans.size() != world.specs.size() || world.states.size() != world.specs.size())
    throw ShapeError("world needs one spec, state and plan per agent");
  if (coupling_residual(world.specs, world.plans) > 1e-8)
    throw FeasibilityError("plans are not jointly feasible at step " + std::to_string(world.step));

  MpcStepResult res;
  res.turn = world.order.empty() ? world.step % n
                                 : world.order[static_cast<std::size_t>(world.step) % world.order.size()];
  auto out = replan(world.specs[res.turn], world.plans[res.turn],
                    output_sum(world.specs, world.plans, res.turn));
  world.plans[res.turn] = std::move(out.plan);
  res.accepted = out.accepted;

  VectorXd z_sum = VectorXd::Zero(world.specs.front().model.nz());
  for (int i = 0; i < n; ++i) {
    const auto& m = world.specs[i].model;
    const VectorXd u = world.plans[i].inputs.row(0).transpose();
    const VectorXd z = m.C * world.states[i] + m.D * u;
    const VectorXd x_next = m.A * world.states[i] + m.B * u;
    res.inputs.push_back(u);
    res.outputs.push_back(z);
    res.next_states.push_back(x_next);
    z_sum += z;
    world.plans[i] = shift_plan(world.plans[i], world.specs[i]);
    world.plans[i].states.row(0) = x_next.transpose();
    world.states[i] = x_next;
  }
  res.applied_residual = coupling_residual_at(world.specs.front().S, z_sum);
  ++world.step;
  return res;
}

std::vector<Plan> bootstrap_joint_plans(const std::vector<OcpSpec>& specs) {
  if (specs.empty()) throw ShapeError("no agents");
  LpBuilder b;
  std::vector<Block> blocks;
  blocks.reserve(specs.size());
  for (const auto& s : specs) {
    s.validate();
    if (s.T != specs.front().T || s.model.nz() != specs.front().model.nz())
      throw ShapeError("agents must share horizon and output dimension");
    blocks.push_back(add_agent(b, s, s.model.x0));
  }
  std::vector<const Block*> ptrs;
  for (const auto& blk : blocks) ptrs.push_back(&blk);
  const int T = specs.front().T;
  add_coupling(b, specs.front().S, ptrs, MatrixXd::Zero(T, specs.front().model.nz()), T);
  const auto sol = lp::solve_lp(b.build());
  if (sol.status != lp::LpStatus::Optimal) throw FeasibilityError("no jointly feasible initial plans");
  const VectorXd vars = b.recover(sol.x);
  std::vector<Plan> plans;
  for (std::size_t i = 0; i < specs.size(); ++i)
    plans.push_back(extract(specs[i], blocks[i], vars, specs[i].model.x0));
  return plans;
}

// ---------------------------------------------------------------------------

Value plan_payload(AgentId agent, int step, const MatrixXd& outputs) {
  RealMatrix m;
  m.rows = static_cast<std::uint32_t>(outputs.rows());
  m.cols = static_cast<std::uint32_t>(outputs.cols());
  for (Eigen::Index r = 0; r < outputs.rows(); ++r)
    for (Eigen::Index c = 0; c < outputs.cols(); ++c) m.data.push_back(outputs(r, c));
  return Value(ValueMap{{"agent", Value(agent)}, {"step_index", Value(step)}, {"outputs", Value(m)}});
}

PlanMessage plan_from_payload(const Value& v) {
  PlanMessage msg;
  msg.agent = static_cast<AgentId>(v.at("agent").as_int());
  msg.step = static_cast<int>(v.at("step_index").as_int());
  const auto& m = v.at("outputs").as<RealMatrix>();
  msg.outputs.resize(m.rows, m.cols);
  for (std::uint32_t r = 0; r < m.rows; ++r)
    for (std::uint32_t c = 0; c < m.cols; ++c) msg.outputs(r, c) = m(r, c);
  return msg;
}

DistributedMpcAgent::DistributedMpcAgent(AgentId id, OcpSpec spec, Plan initial)
    : id_(id), spec_(std::move(spec)), plan_(std::move(initial)), x_(plan_.states.row(0).transpose()) {
  spec_.validate();
  if (!locally_feasible(spec_, plan_, 1e-7)) throw PlanError("initial plan is not locally feasible");
}

Value DistributedMpcAgent::broadcast(int step) const { return plan_payload(id_, step, plan_.outputs); }

void DistributedMpcAgent::absorb(const std::map<AgentId, Value>& messages) {
  for (const auto& [sender, v] : messages) {
    PlanMessage msg = plan_from_payload(v);
    if (msg.agent != sender) throw ProtocolError("plan message sender mismatch");
    if (msg.outputs.rows() != spec_.T || msg.outputs.cols() != spec_.model.nz())
      throw ProtocolError("plan message has the wrong shape");
    others_.insert_or_assign(sender, std::move(msg.outputs));
  }
}

MatrixXd DistributedMpcAgent::others_output_sum() const {
  MatrixXd sum = MatrixXd::Zero(spec_.T, spec_.model.nz());
  for (const auto& [j, z] : others_) sum += z;
  return sum;
}

ReplanOutcome DistributedMpcAgent::replan_now() {
  auto out = replan(spec_, plan_, others_output_sum());
  plan_ = out.plan;
  return out;
}

std::pair<VectorXd, VectorXd> DistributedMpcAgent::apply() {
  const auto& m = spec_.model;
  const VectorXd u = plan_.inputs.row(0).transpose();
  const VectorXd z = m.C * x_ + m.D * u;
  x_ = m.A * x_ + m.B * u;
  plan_ = shift_plan(plan_, spec_);
  plan_.states.row(0) = x_.transpose();
  return {u, z};
}

DistributedMpcResult run_distributed_mpc(const std::vector<OcpSpec>& specs,
                                         const std::vector<Plan>& initial_plans, int steps,
                                         std::vector<int> order) {
  const int n = static_cast<int>(specs.size());
  if (n == 0 || initial_plans.size() != specs.size()) throw ShapeError("one initial plan per agent required");
  if (coupling_residual(specs, initial_plans) > 1e-8)
    throw FeasibilityError("initial plans are not jointly feasible");
  if (order.empty())
    for (int i = 0; i < n; ++i) order.push_back(i);

  auto bus = std::make_shared<Bus>();
  const CommGraph g = CommGraph::complete(n);
  std::vector<Communicator> comms;
  std::vector<DistributedMpcAgent> agents;
  std::vector<NeighborSets> nb;
  for (int i = 0; i < n; ++i) {
    comms.push_back(Communicator::make_static(bus, i, g));
    agents.emplace_back(i, specs[i], initial_plans[i]);
    nb.push_back(comms.back().base_neighbors());
  }

  DistributedMpcResult res;
  auto snapshot = [&] {
    std::vector<VectorXd> xs;
    for (const auto& a : agents) xs.push_back(a.state());
    res.states.push_back(std::move(xs));
  };
  snapshot();
  for (int k = 0; k < steps; ++k) {
    for (int i = 0; i < n; ++i) comms[i].send(agents[i].broadcast(k), nb[i].out, static_cast<std::uint64_t>(k));
    for (int i = 0; i < n; ++i) agents[i].absorb(comms[i].gather(nb[i].in, static_cast<std::uint64_t>(k)));
    const int turn = order[static_cast<std::size_t>(k) % order.size()];
    agents[turn].replan_now();

    std::vector<Plan> plans;
    for (const auto& a : agents) {
      plans.push_back(a.plan());
      if (!locally_feasible(a.spec(), a.plan(), 1e-7)) res.recursively_feasible = false;
    }
    if (coupling_residual(specs, plans) > 1e-8) res.recursively_feasible = false;

    VectorXd z_sum = VectorXd::Zero(specs.front().model.nz());
    std::vector<MpcTraceRow> rows;
    for (int i = 0; i < n; ++i) {
      MpcTraceRow row;
      row.step = k;
      row.agent = i;
      row.state = agents[i].state();
      auto [u, z] = agents[i].apply();
      row.input = u;
      row.output = z;
      res.closed_loop_cost += stage_cost(specs[i], row.state, u);
      z_sum += z;
      rows.push_back(std::move(row));
    }
    const double resid = coupling_residual_at(specs.front().S, z_sum);
    res.max_applied_residual = std::max(res.max_applied_residual, resid);
    for (auto& row : rows) {
      row.coupling_residual = resid;
      res.rows.push_back(std::move(row));
    }
    snapshot();
  }
  return res;
}

}  // namespace robonet
