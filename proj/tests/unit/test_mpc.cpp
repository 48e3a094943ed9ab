#include <gtest/gtest.h>

#include <random>

#include "mpc_oracle.hpp"
#include "oracles.hpp"
#include "robonet/error.hpp"
#include "robonet/mpc.hpp"

using namespace robonet;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

/// Scalar integrator z = x heading for x_bar under |u| <= umax.
OcpSpec scalar_agent(double x0, double x_bar, int T, double umax = 0.2, double q = 1.0, double r = 0.1) {
  OcpSpec s;
  s.model.A = MatrixXd::Ones(1, 1);
  s.model.B = MatrixXd::Ones(1, 1);
  s.model.C = MatrixXd::Ones(1, 1);
  s.model.D = MatrixXd::Zero(1, 1);
  s.model.x0 = vec({x0});
  s.T = T;
  s.X = Polyhedron::box(vec({-10}), vec({10}));
  s.U = Polyhedron::box(vec({-umax}), vec({umax}));
  s.S = Polyhedron::whole(1);
  s.q = vec({q});
  s.r = vec({r});
  s.x_ref = vec({x_bar});
  s.u_ref = vec({0});
  s.x_bar = vec({x_bar});
  s.u_bar = vec({0});
  return s;
}

OcpSpec double_integrator(const VectorXd& x0, int T) {
  OcpSpec s;
  s.model.A = (MatrixXd(2, 2) << 1, 1, 0, 1).finished();
  s.model.B = (MatrixXd(2, 1) << 0.5, 1).finished();
  s.model.C = (MatrixXd(1, 2) << 1, 0).finished();
  s.model.D = MatrixXd::Zero(1, 1);
  s.model.x0 = x0;
  s.T = T;
  s.X = Polyhedron::box(vec({-10, -10}), vec({10, 10}));
  s.U = Polyhedron::box(vec({-1}), vec({1}));
  s.S = Polyhedron::whole(1);
  s.q = vec({1.0, 0.37});
  s.r = vec({0.113});
  s.x_ref = vec({0, 0});
  s.u_ref = vec({0});
  s.x_bar = vec({0, 0});
  s.u_bar = vec({0});
  return s;
}

oracle::CondensedMpc oracle_for(const OcpSpec& s) {
  oracle::CondensedMpc o;
  o.A = s.model.A;
  o.B = s.model.B;
  o.q = s.q;
  o.r = s.r;
  o.xr = s.x_ref;
  o.ur = s.u_ref;
  o.xbar = s.x_bar;
  o.T = s.T;
  // Box sets only: rows come in +e_k / -e_k pairs.
  const int nx = s.model.nx(), nu = s.model.nu();
  o.x_hi = s.X.g.head(nx);
  o.x_lo = -s.X.g.tail(nx);
  o.u_hi = s.U.g.head(nu);
  o.u_lo = -s.U.g.tail(nu);
  return o;
}

MatrixXd zeros_outputs(const OcpSpec& s) { return MatrixXd::Zero(s.T, s.model.nz()); }

std::vector<Plan> solo_plans(const std::vector<OcpSpec>& specs) {
  std::vector<Plan> out;
  for (const auto& s : specs) {
    auto p = solve_local_ocp(s, zeros_outputs(s), s.model.x0);
    if (!p) throw std::runtime_error("solo plan infeasible");
    out.push_back(*p);
  }
  return out;
}

}  // namespace

TEST(Oracle, TableauSimplexAgreesWithVertexEnumeration) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-1, 1), pos(0.1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + trial % 2, n = m + 3;
    MatrixXd A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = d(rng);
    VectorXd x0(n), c(n);
    for (int j = 0; j < n; ++j) {
      x0(j) = pos(rng);
      c(j) = pos(rng);
    }
    VectorXd b = A * x0;
    auto t = oracle::tableau_simplex(A, b, c);
    ASSERT_TRUE(t.feasible);
    EXPECT_NEAR(t.objective, oracle::vertex_enumeration_lp(A, b, c), 1e-9);
  }
}

TEST(Model, ValidateShapes) {
  auto s = scalar_agent(0, 0, 3);
  EXPECT_NO_THROW(s.validate());
  s.model.B = MatrixXd::Ones(2, 1);
  EXPECT_THROW(s.validate(), ShapeError);
  auto bad_eq = scalar_agent(0, 0, 3);
  bad_eq.u_bar = vec({0.1});  // 0 != 0 + 0.1
  EXPECT_THROW(bad_eq.validate(), PlanError);
}

TEST(Polyhedron, ResidualAndBox) {
  auto b = Polyhedron::box(vec({-1, 0}), vec({1, 2}));
  EXPECT_DOUBLE_EQ(b.residual(vec({0, 1})), -1.0);
  EXPECT_DOUBLE_EQ(b.residual(vec({1.5, 1})), 0.5);
  EXPECT_EQ(Polyhedron::whole(2).residual(vec({1e9, 1e9})), -std::numeric_limits<double>::infinity());
}

TEST(LocalOcp, OneStepDeadbeat) {
  auto s = scalar_agent(1.0, 0.0, 1, 1.0);
  auto p = solve_local_ocp(s, zeros_outputs(s), s.model.x0);
  ASSERT_TRUE(p.has_value());
  EXPECT_NEAR(p->inputs(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(p->states(1, 0), 0.0, 1e-12);
}

TEST(LocalOcp, UnreachableTerminalIsInfeasible) {
  auto s = scalar_agent(5.0, 0.0, 2, 1.0);
  EXPECT_FALSE(solve_local_ocp(s, zeros_outputs(s), s.model.x0).has_value());
  auto ocp = build_local_ocp(s, zeros_outputs(s));
  EXPECT_EQ(lp::solve_lp(ocp.lp).status, lp::LpStatus::Infeasible);
}

TEST(LocalOcp, VacuousCouplingIgnoresOthers) {
  auto s = scalar_agent(0.3, 0.5, 5);
  auto a = build_local_ocp(s, zeros_outputs(s));
  auto b = build_local_ocp(s, MatrixXd::Constant(5, 1, 42.0));
  EXPECT_EQ(a.lp.A, b.lp.A);
  EXPECT_EQ(a.lp.b, b.lp.b);
  s.S = Polyhedron{MatrixXd::Ones(1, 1), vec({1.0})};
  auto c = build_local_ocp(s, zeros_outputs(s));
  EXPECT_GT(c.lp.A.rows(), a.lp.A.rows());
}

TEST(LocalOcp, ShapeMismatch) {
  auto s = scalar_agent(0.3, 0.5, 5);
  EXPECT_THROW(build_local_ocp(s, MatrixXd::Zero(4, 1)), ShapeError);
}

TEST(LocalOcp, MatchesOracleCost) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    auto s = double_integrator(vec({d(rng), d(rng) / 3}), 10);
    auto p = solve_local_ocp(s, zeros_outputs(s), s.model.x0);
    auto o = oracle_for(s).solve(s.model.x0);
    ASSERT_EQ(p.has_value(), o.has_value());
    if (!p) continue;
    EXPECT_TRUE(locally_feasible(s, *p));
    const Plan ref = rollout(s, s.model.x0, *o);
    EXPECT_NEAR(p->cost, ref.cost, 1e-7);
  }
}

TEST(ShiftPlan, EquilibriumIsFixedPoint) {
  auto s = scalar_agent(0.5, 0.5, 4);
  Plan p = rollout(s, s.model.x0, MatrixXd::Zero(4, 1));
  Plan q = shift_plan(p, s);
  EXPECT_EQ(q.states, p.states);
  EXPECT_EQ(q.inputs, p.inputs);
  EXPECT_EQ(q.outputs, p.outputs);
}

TEST(ShiftPlan, EndsAtTerminalState) {
  auto s = double_integrator(vec({2, 0}), 10);
  auto p = solve_local_ocp(s, zeros_outputs(s), s.model.x0);
  ASSERT_TRUE(p);
  Plan q = shift_plan(*p, s);
  EXPECT_LE((q.states.row(s.T) - s.x_bar.transpose()).norm(), 1e-12);
  EXPECT_LE((q.states.row(s.T - 1) - s.x_bar.transpose()).norm(), 1e-9);
  EXPECT_LE(dynamics_residual(s, q), 1e-9);
  EXPECT_TRUE(locally_feasible(s, q));
}

TEST(ShiftPlan, CorruptedPlanRejected) {
  auto s = double_integrator(vec({2, 0}), 10);
  auto p = *solve_local_ocp(s, zeros_outputs(s), s.model.x0);
  p.inputs(3, 0) += 1e-6;
  EXPECT_THROW(shift_plan(p, s), PlanError);
}

TEST(MpcRound, DecoupledReachesSoloOptimum) {
  std::vector<OcpSpec> specs{scalar_agent(0.0, 0.5, 8), scalar_agent(1.0, 0.2, 8), scalar_agent(-0.4, 0.1, 8)};
  // Start from slow but feasible plans: creep at a fraction of the bound.
  std::vector<Plan> plans;
  for (const auto& s : specs) {
    MatrixXd u = MatrixXd::Zero(s.T, 1);
    const double dist = s.x_bar(0) - s.model.x0(0);
    for (int t = 0; t < s.T; ++t) u(t, 0) = dist / s.T;
    plans.push_back(rollout(s, s.model.x0, u));
  }
  for (int turn = 0; turn < 3; ++turn) plans = mpc_round(specs, plans, turn);
  for (int i = 0; i < 3; ++i) {
    auto o = oracle_for(specs[i]).solve(specs[i].model.x0);
    ASSERT_TRUE(o);
    EXPECT_LE((plans[i].inputs - *o).cwiseAbs().maxCoeff(), 1e-9) << "agent " << i;
  }
}

TEST(MpcRound, OptimalPlansAreUnchanged) {
  std::vector<OcpSpec> specs{scalar_agent(0.0, 0.5, 6), scalar_agent(0.2, 0.3, 6)};
  auto plans = solo_plans(specs);
  auto next = mpc_round(specs, plans, 1);
  for (int i = 0; i < 2; ++i) {
    EXPECT_LE((next[i].inputs - plans[i].inputs).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(next[i].cost, plans[i].cost + 1e-12);
  }
}

TEST(MpcRound, CoupledRoundKeepsJointFeasibility) {
  auto a = scalar_agent(0.1, 0.5, 10), b = scalar_agent(0.2, 0.5, 10);
  a.x_ref = vec({0.9});
  b.x_ref = vec({0.9});
  a.S = b.S = Polyhedron{MatrixXd::Ones(1, 1), vec({1.0})};
  std::vector<OcpSpec> specs{a, b};
  auto plans = bootstrap_joint_plans(specs);
  EXPECT_LE(coupling_residual(specs, plans), 1e-8);
  for (int turn : {0, 1, 0, 1}) {
    plans = mpc_round(specs, plans, turn);
    EXPECT_LE(coupling_residual(specs, plans), 1e-8);
    for (int i = 0; i < 2; ++i) EXPECT_TRUE(locally_feasible(specs[i], plans[i]));
  }
}

TEST(MpcRound, InfeasibleIncomingPlansRejected) {
  auto a = scalar_agent(0.9, 0.9, 3), b = scalar_agent(0.9, 0.9, 3);
  a.S = b.S = Polyhedron{MatrixXd::Ones(1, 1), vec({1.0})};
  std::vector<OcpSpec> specs{a, b};
  auto plans = solo_plans(specs);  // 0.9 + 0.9 > 1
  EXPECT_THROW(mpc_round(specs, plans, 0), FeasibilityError);
  EXPECT_THROW(bootstrap_joint_plans(specs), FeasibilityError);
}

TEST(Replan, RejectsWorsePlanAndReportsInfeasible) {
  auto s = scalar_agent(0.0, 0.5, 6);
  auto best = *solve_local_ocp(s, zeros_outputs(s), s.model.x0);
  auto r = replan(s, best, zeros_outputs(s));
  EXPECT_LE(r.plan.cost, best.cost + 1e-12);
  // Others already sit at the coupling bound: no feasible move at all, the
  // old plan is kept.
  s.S = Polyhedron{MatrixXd::Ones(1, 1), vec({0.0})};
  auto stuck = replan(s, best, MatrixXd::Constant(6, 1, 10.0));
  EXPECT_TRUE(stuck.infeasible);
  EXPECT_FALSE(stuck.accepted);
  EXPECT_EQ(stuck.plan.inputs, best.inputs);
}

TEST(MpcStep, EquilibriumStartStaysPut) {
  MpcWorld w;
  w.specs = {scalar_agent(0.5, 0.5, 5), scalar_agent(-0.25, -0.25, 5)};
  for (const auto& s : w.specs) w.states.push_back(s.model.x0);
  w.plans = solo_plans(w.specs);
  for (int k = 0; k < 10; ++k) {
    auto r = mpc_step(w);
    EXPECT_EQ(r.next_states[0](0), 0.5);
    EXPECT_EQ(r.next_states[1](0), -0.25);
  }
}

TEST(MpcStep, SingleDoubleIntegratorMatchesOracle) {
  auto s = double_integrator(vec({3, -1}), 10);
  MpcWorld w;
  w.specs = {s};
  w.states = {s.model.x0};
  w.plans = solo_plans(w.specs);
  auto ref = oracle_for(s).closed_loop(s.model.x0, 30);
  for (int k = 0; k < 30; ++k) {
    mpc_step(w);
    EXPECT_LE((w.states[0] - ref[k + 1]).cwiseAbs().maxCoeff(), 1e-6) << "step " << k;
  }
}

TEST(MpcStep, CoupledResidualAndRecursiveFeasibility) {
  auto a = scalar_agent(0.1, 0.5, 10), b = scalar_agent(0.2, 0.5, 10);
  a.x_ref = b.x_ref = vec({0.9});
  a.S = b.S = Polyhedron{MatrixXd::Ones(1, 1), vec({1.0})};
  MpcWorld w;
  w.specs = {a, b};
  w.states = {a.model.x0, b.model.x0};
  w.plans = bootstrap_joint_plans(w.specs);
  std::vector<double> last_cost{w.plans[0].cost, w.plans[1].cost};
  for (int k = 0; k < 30; ++k) {
    auto r = mpc_step(w);
    EXPECT_LE(r.applied_residual, 1e-8) << "step " << k;
    EXPECT_LE(coupling_residual(w.specs, w.plans), 1e-8);
    for (int i = 0; i < 2; ++i) EXPECT_TRUE(locally_feasible(w.specs[i], w.plans[i]));
  }
}

TEST(MpcStep, ReplanNeverRaisesOwnCost) {
  auto a = scalar_agent(0.1, 0.5, 10), b = scalar_agent(0.2, 0.5, 10);
  a.x_ref = b.x_ref = vec({0.9});
  a.S = b.S = Polyhedron{MatrixXd::Ones(1, 1), vec({1.0})};
  MpcWorld w;
  w.specs = {a, b};
  w.states = {a.model.x0, b.model.x0};
  w.plans = bootstrap_joint_plans(w.specs);
  for (int k = 0; k < 20; ++k) {
    const int turn = k % 2;
    const double before = plan_cost(w.specs[turn], w.plans[turn]);
    auto planned = mpc_round(w.specs, w.plans, turn);
    EXPECT_LE(planned[turn].cost, before + 1e-9 * std::max(1.0, std::abs(before)));
    mpc_step(w);
  }
}

TEST(DistributedMpc, DecoupledEqualsIndependentLoops) {
  std::vector<OcpSpec> specs{double_integrator(vec({3, -1}), 10), double_integrator(vec({-2, 0.5}), 10),
                             double_integrator(vec({1, 1}), 10)};
  auto res = run_distributed_mpc(specs, solo_plans(specs), 30);
  ASSERT_EQ(res.states.size(), 31u);
  for (int i = 0; i < 3; ++i) {
    auto ref = oracle_for(specs[i]).closed_loop(specs[i].model.x0, 30);
    for (int k = 0; k <= 30; ++k)
      EXPECT_LE((res.states[k][i] - ref[k]).cwiseAbs().maxCoeff(), 1e-9) << "agent " << i << " step " << k;
  }
  EXPECT_TRUE(res.recursively_feasible);
}

TEST(DistributedMpc, MatchesLockstepWorld) {
  auto a = scalar_agent(0.1, 0.5, 10), b = scalar_agent(0.2, 0.5, 10);
  a.x_ref = b.x_ref = vec({0.9});
  a.S = b.S = Polyhedron{MatrixXd::Ones(1, 1), vec({1.0})};
  std::vector<OcpSpec> specs{a, b};
  auto plans = bootstrap_joint_plans(specs);
  auto res = run_distributed_mpc(specs, plans, 30);
  MpcWorld w;
  w.specs = specs;
  w.states = {a.model.x0, b.model.x0};
  w.plans = plans;
  for (int k = 0; k < 30; ++k) {
    mpc_step(w);
    for (int i = 0; i < 2; ++i) EXPECT_LE((res.states[k + 1][i] - w.states[i]).norm(), 1e-12);
  }
  EXPECT_LE(res.max_applied_residual, 1e-8);
  EXPECT_TRUE(res.recursively_feasible);
}

TEST(DistributedMpc, PlanPayloadRoundTrip) {
  MatrixXd z = MatrixXd::Random(4, 2);
  auto m = plan_from_payload(decode(encode(plan_payload(3, 17, z))));
  EXPECT_EQ(m.agent, 3);
  EXPECT_EQ(m.step, 17);
  EXPECT_EQ(m.outputs, z);
  EXPECT_ANY_THROW(plan_from_payload(Value(1)));
}
