#include <gtest/gtest.h>

#include <random>
#include <set>
#include <thread>

#include "oracles.hpp"
#include "robonet/assignment.hpp"
#include "robonet/error.hpp"
#include "robonet/lp.hpp"
#include "robonet/task_flow.hpp"

using namespace robonet;

namespace {

/// Lockstep driver written against the agent API only: every round each
/// agent hears every in-neighbour's previous outgoing message.
std::vector<DistributedSimplexAgent> drive(const Eigen::MatrixXd& c, const CommGraph& g, int rounds,
                                           DistributedSimplexOptions opts = {}) {
  const int n = static_cast<int>(c.rows());
  std::vector<DistributedSimplexAgent> agents;
  for (int i = 0; i < n; ++i) agents.emplace_back(i, n, c.row(i).transpose(), opts);
  for (int r = 0; r < rounds; ++r) {
    std::vector<Value> out;
    for (const auto& a : agents) out.push_back(a.outgoing());
    for (int i = 0; i < n; ++i) {
      std::map<AgentId, Value> in;
      for (int j : neighbor_sets(g, i).in) in.emplace(j, out[j]);
      agents[i].absorb(in);
    }
  }
  return agents;
}

bool lex_le(double a1, double c1, double a0, double c0) {
  if (a1 < a0 - 1e-9) return true;
  if (a1 > a0 + 1e-9) return false;
  return c1 <= c0 + 1e-9;
}

}  // namespace

TEST(Costs, Euclidean) {
  auto c = costs_from_positions({0, 0}, {{3, 4}, {0, 1}});
  EXPECT_DOUBLE_EQ(c(0), 5.0);
  EXPECT_DOUBLE_EQ(c(1), 1.0);
  EXPECT_EQ(costs_from_positions({2, 2}, {{2, 2}})(0), 0.0);
  EXPECT_ANY_THROW(costs_from_positions({0, 0}, {}));
}

TEST(Costs, TranslationInvariantAssignment) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(-5, 5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::Vector2d> robots(4), tasks(4);
    for (auto& p : robots) p = {d(rng), d(rng)};
    for (auto& p : tasks) p = {d(rng), d(rng)};
    const Eigen::Vector2d shift(d(rng), d(rng));
    Eigen::MatrixXd a(4, 4), b(4, 4);
    std::vector<Eigen::Vector2d> moved;
    for (auto& t : tasks) moved.push_back(t + shift);
    for (int i = 0; i < 4; ++i) {
      a.row(i) = costs_from_positions(robots[i], tasks).transpose();
      b.row(i) = costs_from_positions(robots[i] + shift, moved).transpose();
    }
    EXPECT_EQ(lp::hungarian({4, a}).assignment, lp::hungarian({4, b}).assignment);
  }
}

TEST(Columns, LocalColumnsStructure) {
  Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(4, 1, 4);
  auto cols = local_columns(2, c, 4);
  ASSERT_EQ(cols.size(), 4u);
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(cols[k].robot, 2);
    EXPECT_EQ(cols[k].task, k);
    EXPECT_EQ(cols[k].cost, c(k));
    ASSERT_EQ(cols[k].a.size(), 7u);
    double sum = 0;
    for (double v : cols[k].a) sum += v;
    EXPECT_EQ(cols[k].a[2], 1.0);
    if (k < 3) {
      EXPECT_EQ(sum, 2.0);
      EXPECT_EQ(cols[k].a[4 + k], 1.0);
    } else {
      EXPECT_EQ(sum, 1.0);  // last task row is the dropped one
    }
  }
  std::set<long> ids;
  for (int r = 0; r < 4; ++r)
    for (const auto& col : local_columns(r, c, 4)) EXPECT_TRUE(ids.insert(col.global_id(4)).second);
}

TEST(Columns, MalformedColumnsRejected) {
  auto col = make_column(3, 1, 2, 1.0);
  col.a[0] = 1.0;
  EXPECT_THROW(validate_column(col, 3), ProtocolError);
  EXPECT_THROW(validate_column(make_column(3, 1, 2, 1.0), 4), ProtocolError);
  auto bad = make_column(3, 0, 0, NAN);
  EXPECT_THROW(validate_column(bad, 3), ProtocolError);
  EXPECT_THROW(simplex_round(initial_basis(3), {col}, {}), ProtocolError);
}

TEST(SimplexRound, FixedPointWithoutNews) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(3, 3);
  auto own = local_columns(0, c.row(0).transpose(), 3);
  auto b1 = simplex_round(initial_basis(3), own, {});
  EXPECT_EQ(simplex_round(b1, own, {}), b1);
}

TEST(SimplexRound, SingleAgentImmediatelyOptimal) {
  DistributedSimplexAgent a(0, 1, Eigen::VectorXd::Constant(1, 2.5), {});
  EXPECT_EQ(a.basis().artificial_count, 0);
  EXPECT_DOUBLE_EQ(a.basis().objective, 2.5);
  a.absorb({});
  a.absorb({});
  EXPECT_TRUE(a.halted());
  EXPECT_EQ(a.assigned_task(), 0);
}

TEST(SimplexRound, FullPoolMatchesHungarian) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    Eigen::MatrixXd c = oracle::random_costs(n, rng);
    std::vector<SimplexColumn> all;
    for (int i = 0; i < n; ++i) {
      auto cols = local_columns(i, c.row(i).transpose(), n);
      all.insert(all.end(), cols.begin(), cols.end());
    }
    auto b = simplex_round(initial_basis(n), all, {});
    ASSERT_EQ(b.artificial_count, 0);
    auto perm = basis_permutation(b, n);
    EXPECT_EQ(lp::assignment_cost(c, perm), oracle::brute_force_assignment(c).cost);
  }
}

TEST(Protocol, PathGraphReachesIdentity) {
  Eigen::MatrixXd c(3, 3);
  c << 0, 5, 5, 5, 0, 5, 5, 5, 0;
  CommGraph path = CommGraph::from_edges(3, {{0, 1}, {1, 2}}, true);
  auto agents = drive(c, path, 3 * diameter(path));
  for (const auto& a : agents) {
    ASSERT_EQ(a.basis().artificial_count, 0);
    EXPECT_EQ(basis_permutation(a.basis(), 3), (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(a.basis().objective, 0.0);
  }
}

TEST(Protocol, LexObjectiveNonIncreasing) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + trial % 4;
    auto g = erdos_renyi(n, 0.3, trial, true);
    auto agents = drive(oracle::random_costs(n, rng), g, 6 * n);
    for (const auto& a : agents) {
      const auto& c = a.objective_history();
      const auto& w = a.artificial_history();
      ASSERT_EQ(c.size(), w.size());
      for (std::size_t k = 1; k < c.size(); ++k)
        EXPECT_TRUE(lex_le(w[k], c[k], w[k - 1], c[k - 1])) << "trial " << trial << " round " << k;
    }
  }
}

TEST(Protocol, LockstepOptimalAndConsensual) {
  std::mt19937_64 rng(99);
  for (int n = 2; n <= 6; ++n)
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd c = oracle::random_costs(n, rng);
      LockstepAssignmentConfig cfg;
      cfg.schedule = EdgeSchedule::always(erdos_renyi(n, 0.2, 1000 * n + trial, true));
      auto r = solve_assignment_lockstep(c, cfg);
      EXPECT_TRUE(r.consensus);
      for (const auto& p : r.per_agent) EXPECT_EQ(p, r.permutation);
      EXPECT_EQ(lp::assignment_cost(c, r.permutation), lp::assignment_cost(c, lp::hungarian({n, c}).assignment));
    }
}

TEST(Protocol, TiesStillReachConsensus) {
  for (int n = 2; n <= 5; ++n) {
    LockstepAssignmentConfig cfg;
    cfg.schedule = EdgeSchedule::always(CommGraph::cycle(n, true));
    auto r = solve_assignment_lockstep(Eigen::MatrixXd::Ones(n, n), cfg);
    EXPECT_TRUE(r.consensus);
    EXPECT_EQ(lp::assignment_cost(Eigen::MatrixXd::Ones(n, n), r.permutation), n);
  }
}

TEST(Protocol, LossyBestEffortConverges) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4;
    Eigen::MatrixXd c = oracle::random_costs(n, rng);
    LockstepAssignmentConfig cfg;
    cfg.profile = CommProfile::BestEffort;
    cfg.schedule = EdgeSchedule::always(erdos_renyi(n, 0.2, trial, true));
    cfg.transport.drop_prob = 0.3;
    cfg.transport.rng_seed = trial;
    auto r = solve_assignment_lockstep(c, cfg);
    EXPECT_TRUE(r.consensus);
    EXPECT_EQ(lp::assignment_cost(c, r.permutation), lp::assignment_cost(c, lp::hungarian({n, c}).assignment));
    EXPECT_GT(r.stats.dropped, 0u);
  }
}

TEST(Protocol, RoundBudgetExceeded) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Random(4, 4).cwiseAbs();
  LockstepAssignmentConfig cfg;
  cfg.schedule = EdgeSchedule::always(CommGraph(4));  // nobody talks
  cfg.options.max_rounds = 30;
  EXPECT_THROW(solve_assignment_lockstep(c, cfg), NonConvergenceError);
}

TEST(Protocol, HaltingWindow) {
  EXPECT_EQ(halting_window(3, 0.0), 6);
  EXPECT_EQ(halting_window(3, 0.3), 6 * 12);  // 0.3^12 < 1e-6 <= 0.3^11
  EXPECT_ANY_THROW(halting_window(3, 1.0));
}

TEST(Protocol, ThreadedStaticMatchesHungarian) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4;
    Eigen::MatrixXd c = oracle::random_costs(n, rng);
    CommGraph g = erdos_renyi(n, 0.2, 40 + trial, true);
    auto bus = std::make_shared<Bus>();
    std::vector<Communicator> comms;
    for (int i = 0; i < n; ++i) comms.push_back(Communicator::make_static(bus, i, g));
    std::vector<DistributedAssignmentResult> res(n);
    std::vector<std::thread> ts;
    for (int i = 0; i < n; ++i)
      ts.emplace_back([&, i] { res[i] = run_distributed_simplex(comms[i], i, c.row(i).transpose(), n); });
    for (auto& t : ts) t.join();
    const auto h = lp::hungarian({n, c});
    for (int i = 0; i < n; ++i) {
      EXPECT_EQ(res[i].permutation, res[0].permutation);
      EXPECT_EQ(res[i].task, res[0].permutation[i]);
    }
    EXPECT_EQ(lp::assignment_cost(c, res[0].permutation), lp::assignment_cost(c, h.assignment));
  }
}

TEST(Protocol, ThreadedBestEffortLossy) {
  std::mt19937_64 rng(14);
  const int n = 4;
  Eigen::MatrixXd c = oracle::random_costs(n, rng);
  CommGraph g = CommGraph::complete(n);
  auto bus = std::make_shared<Bus>();
  TransportConfig t;
  t.drop_prob = 0.3;
  t.rng_seed = 3;
  std::vector<Communicator> comms;
  for (int i = 0; i < n; ++i) comms.push_back(Communicator::make_best_effort(bus, i, EdgeSchedule::always(g), t));
  DistributedSimplexOptions opts;
  opts.halt_window = halting_window(1, 0.3);
  std::vector<DistributedAssignmentResult> res(n);
  std::vector<std::thread> ts;
  for (int i = 0; i < n; ++i)
    ts.emplace_back([&, i] {
      // Best-effort receives never wait, so pace rounds to let peers publish.
      DistributedSimplexAgent a(i, n, c.row(i).transpose(), opts);
      const auto nb = comms[i].base_neighbors();
      for (std::uint64_t r = 0; !a.halted(); ++r) {
        comms[i].send(a.outgoing(), nb.out, r);
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
        a.absorb(comms[i].gather(nb.in, r));
      }
      res[i].permutation = a.permutation();
    });
  for (auto& th : ts) th.join();
  for (int i = 0; i < n; ++i)
    EXPECT_EQ(lp::assignment_cost(c, res[i].permutation), lp::assignment_cost(c, lp::hungarian({n, c}).assignment));
}

TEST(Protocol, StaleEpochAndGarbageIgnored) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Ones(2, 2);
  DistributedSimplexAgent a(0, 2, c.row(0).transpose(), {}, 5);
  DistributedSimplexAgent old(1, 2, c.row(1).transpose(), {}, 4);
  const auto before = a.basis();
  a.absorb({{1, old.outgoing()}});
  EXPECT_EQ(a.basis(), before);
  a.absorb({{1, Value("garbage")}});
  EXPECT_EQ(a.rejected_messages(), 1);
}

TEST(Payloads, BasisRoundTrip) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Random(3, 3);
  auto b = simplex_round(initial_basis(3), local_columns(1, c.row(1).transpose(), 3), {});
  auto msg = basis_from_payload(decode(encode(basis_payload(b, 9, true))), 3);
  EXPECT_EQ(msg.columns, b.columns);
  EXPECT_EQ(msg.epoch, 9);
  EXPECT_TRUE(msg.halted);
  EXPECT_THROW(basis_from_payload(basis_payload(b, 9, true), 4), ProtocolError);
}

TEST(Payloads, CloudMessages) {
  auto cloud = make_cloud({{0, 0}, {1, 2}, {3, 4}}, 2);
  auto back = task_list_from_payload(decode(encode(task_list_payload(cloud.open_tasks()))));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].task_id, 1);
  EXPECT_EQ(back[1].position, Eigen::Vector2d(1, 2));
  EXPECT_EQ(completion_from_payload(decode(encode(completion_payload(7)))), 7);
  EXPECT_ANY_THROW(completion_from_payload(Value(3.5)));
}

TEST(Cloud, RevealOnCompletion) {
  auto cloud = make_cloud({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}}, 4);
  EXPECT_EQ(cloud.open_tasks().size(), 4u);
  auto u = cloud_complete(cloud, 0);
  ASSERT_TRUE(u.revealed.has_value());
  EXPECT_EQ(u.revealed->task_id, 4);
  EXPECT_EQ(u.cloud.open_tasks().size(), 4u);
  EXPECT_THROW(cloud_complete(u.cloud, 0), CloudError);
  EXPECT_THROW(cloud_complete(u.cloud, 5), CloudError);  // still hidden
  EXPECT_THROW(cloud_complete(u.cloud, 42), CloudError);
  u = cloud_complete(u.cloud, 1);
  EXPECT_EQ(u.revealed->task_id, 5);
  u = cloud_complete(u.cloud, 2);
  EXPECT_FALSE(u.revealed.has_value());
  EXPECT_EQ(u.cloud.open_tasks().size(), 3u);
  EXPECT_EQ(u.cloud.completed, (std::set<int>{0, 1, 2}));
}
