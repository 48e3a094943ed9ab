#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "robonet/error.hpp"
#include "robonet/lp.hpp"
#include "robonet/task_flow.hpp"

using namespace robonet;

namespace {

TaskFlowConfig four_robots() {
  TaskFlowConfig cfg;
  for (int i = 0; i < 4; ++i) cfg.robots.push_back({-4.0, -3.0 + 2.0 * i, 0.0});
  for (int k = 0; k < 8; ++k) {
    const double a = 0.8 * k, r = 2.0 + 0.3 * k;
    cfg.tasks.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  cfg.initial_tasks = 4;
  cfg.graph = erdos_renyi(4, 0.2, 3, true);
  cfg.max_time = 300.0;
  return cfg;
}

}  // namespace

TEST(Lockstep, SerialAndParallelAgree) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd c = oracle::random_costs(5, rng);
    LockstepAssignmentConfig cfg;
    cfg.schedule = EdgeSchedule::always(erdos_renyi(5, 0.3, trial, true));
    auto a = solve_assignment_lockstep(c, cfg);
    cfg.execution = Execution::Parallel;
    auto b = solve_assignment_lockstep(c, cfg);
    EXPECT_EQ(a.permutation, b.permutation);
    EXPECT_EQ(a.halted_at, b.halted_at);
    EXPECT_EQ(a.objective_histories, b.objective_histories);
  }
}

TEST(Lockstep, TimeVaryingGraphConverges) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd c = oracle::random_costs(4, rng);
    LockstepAssignmentConfig cfg;
    cfg.profile = CommProfile::TimeVarying;
    cfg.schedule = EdgeSchedule(CommGraph::complete(4), 0.5, trial);
    auto r = solve_assignment_lockstep(c, cfg);
    EXPECT_TRUE(r.consensus);
    EXPECT_EQ(lp::assignment_cost(c, r.permutation), lp::assignment_cost(c, lp::hungarian({4, c}).assignment));
  }
}

TEST(TaskFlow, FourPlusFourRevealOnCompletion) {
  auto res = dynamic_assignment_loop(four_robots());
  ASSERT_TRUE(res.all_completed);
  EXPECT_EQ(res.gantt.size(), 8u);
  int reveals_after = 0;
  for (std::size_t k = 0; k < res.events.size(); ++k) {
    if (res.events[k].kind != TaskEventKind::Complete) continue;
    int reveals = 0;
    for (std::size_t j = k + 1; j < res.events.size() && res.events[j].kind == TaskEventKind::Reveal; ++j) ++reveals;
    ++reveals_after;
    EXPECT_EQ(reveals, reveals_after <= 4 ? 1 : 0) << "completion #" << reveals_after;
  }
  EXPECT_EQ(reveals_after, 8);
  std::set<int> tasks;
  for (const auto& g : res.gantt) {
    tasks.insert(g.task_id);
    EXPECT_LE(g.reveal_time, g.assign_time);
    EXPECT_LE(g.assign_time, g.complete_time);
  }
  EXPECT_EQ(tasks.size(), 8u);
}

TEST(TaskFlow, EveryEpochOptimal) {
  auto res = dynamic_assignment_loop(four_robots());
  ASSERT_FALSE(res.epoch_costs.empty());
  ASSERT_EQ(res.epoch_costs.size(), res.epoch_optimal_costs.size());
  for (std::size_t e = 0; e < res.epoch_costs.size(); ++e)
    EXPECT_NEAR(res.epoch_costs[e], res.epoch_optimal_costs[e], 1e-9) << "epoch " << e;
}

TEST(TaskFlow, AtMostNOpenTasks) {
  auto cfg = four_robots();
  std::size_t worst = 0;
  dynamic_assignment_loop(cfg, [&](const TaskFlowSnapshot& s) {
    std::set<int> open;
    for (const auto& e : s.progress->events) {
      if (e.kind == TaskEventKind::Reveal) open.insert(e.task_id);
      if (e.kind == TaskEventKind::Complete) open.erase(e.task_id);
    }
    worst = std::max(worst, open.size());
  });
  EXPECT_LE(worst, 4u);
}

TEST(TaskFlow, RobotOnItsTaskCompletesImmediately) {
  TaskFlowConfig cfg;
  cfg.robots = {{1.0, 1.0, 0.0}};
  cfg.tasks = {{1.0, 1.0}};
  cfg.graph = CommGraph(1);
  auto res = dynamic_assignment_loop(cfg);
  ASSERT_TRUE(res.all_completed);
  ASSERT_EQ(res.gantt.size(), 1u);
  EXPECT_LT(res.gantt[0].complete_time, 0.1);
}

TEST(TaskFlow, ReoptimisationSwitchesTarget) {
  // Robot 0 starts heading to the far task 0. Robot 1 finishes task 1 at
  // once, which reveals task 2 right next to robot 0; the new optimum sends
  // robot 0 there before it reaches task 0.
  TaskFlowConfig cfg;
  cfg.robots = {{0.0, 0.0, 0.0}, {10.0, 0.0, 0.0}};
  cfg.tasks = {{5.0, 0.0}, {10.0, 0.0}, {0.0, 0.5}};
  cfg.initial_tasks = 2;
  cfg.graph = CommGraph::complete(2);
  auto res = dynamic_assignment_loop(cfg);
  ASSERT_TRUE(res.all_completed);
  std::vector<int> targets;
  for (const auto& e : res.events)
    if (e.kind == TaskEventKind::Assign && e.robot == 0) targets.push_back(e.task_id);
  ASSERT_GE(targets.size(), 2u);
  EXPECT_EQ(targets[0], 0);
  EXPECT_EQ(targets[1], 2);
  for (const auto& g : res.gantt)
    if (g.task_id == 2) EXPECT_EQ(g.robot, 0);
}

TEST(TaskFlow, Deterministic) {
  auto a = dynamic_assignment_loop(four_robots());
  auto cfg = four_robots();
  cfg.execution = Execution::Parallel;
  auto b = dynamic_assignment_loop(cfg);
  ASSERT_EQ(a.gantt.size(), b.gantt.size());
  for (std::size_t k = 0; k < a.gantt.size(); ++k) {
    EXPECT_EQ(a.gantt[k].task_id, b.gantt[k].task_id);
    EXPECT_EQ(a.gantt[k].robot, b.gantt[k].robot);
    EXPECT_EQ(a.gantt[k].complete_time, b.gantt[k].complete_time);
  }
  EXPECT_EQ(a.final_states.size(), b.final_states.size());
  for (std::size_t i = 0; i < a.final_states.size(); ++i) EXPECT_EQ(a.final_states[i].x, b.final_states[i].x);
}

TEST(TaskFlow, InputValidation) {
  auto cfg = four_robots();
  cfg.graph = CommGraph(3);
  EXPECT_THROW(dynamic_assignment_loop(cfg), ShapeError);
  cfg = four_robots();
  cfg.initial_tasks = 5;
  EXPECT_THROW(dynamic_assignment_loop(cfg), InvalidParameterError);
}
