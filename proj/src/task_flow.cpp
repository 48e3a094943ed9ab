#include "robonet/task_flow.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <optional>

#include "robonet/error.hpp"
#include "robonet/lp.hpp"

namespace robonet {

LockstepAssignmentResult solve_assignment_lockstep(const Eigen::MatrixXd& costs,
                                                   const LockstepAssignmentConfig& cfg) {
  const int n = static_cast<int>(costs.rows());
  if (n < 1 || costs.cols() != n) throw ShapeError("cost matrix must be square and non-empty");
  if (cfg.schedule.base().size() != n) throw ShapeError("graph size differs from cost matrix");

  DistributedSimplexOptions opts = cfg.options;
  if (opts.diameter_bound <= 0) opts.diameter_bound = std::max(1, n - 1);
  if (opts.halt_window <= 0) opts.halt_window = halting_window(opts.diameter_bound, cfg.transport.drop_prob);

  auto bus = std::make_shared<Bus>();
  std::vector<Communicator> comms;
  std::vector<DistributedSimplexAgent> agents;
  std::vector<NeighborSets> nb;
  for (int i = 0; i < n; ++i) {
    comms.emplace_back(bus, i, cfg.profile, cfg.schedule, cfg.transport);
    agents.emplace_back(i, n, costs.row(i).transpose(), opts);
    nb.push_back(comms.back().base_neighbors());
  }

  LockstepAssignmentResult out;
  out.halted_at.assign(n, -1);
  for (std::uint64_t round = 0;; ++round) {
    for_each_agent(n, cfg.execution, [&](int i) {
      comms[i].send(agents[i].outgoing(), nb[i].out, round);
    });
    for_each_agent(n, cfg.execution, [&](int i) {
      auto got = comms[i].gather(nb[i].in, round, opts.receive_timeout_s);
      agents[i].absorb(got);
      if (agents[i].halted() && out.halted_at[i] < 0) out.halted_at[i] = static_cast<int>(round);
    });
    out.rounds = static_cast<int>(round) + 1;
    if (std::all_of(agents.begin(), agents.end(), [](const auto& a) { return a.halted(); })) break;
  }

  for (const auto& a : agents) {
    out.per_agent.push_back(a.permutation());
    out.objective_histories.push_back(a.objective_history());
  }
  out.permutation = out.per_agent.front();
  out.consensus = std::all_of(out.per_agent.begin(), out.per_agent.end(),
                              [&](const auto& p) { return p == out.permutation; });
  out.objective = lp::assignment_cost(costs, out.permutation);
  out.stats = bus->stats();
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(TaskEventKind k) {
  switch (k) {
    case TaskEventKind::Reveal:
      return "reveal";
    case TaskEventKind::Assign:
      return "assign";
    case TaskEventKind::Complete:
      return "complete";
    case TaskEventKind::Broadcast:
      return "broadcast";
  }
  return "?";
}

namespace {

struct RobotSide {
  std::vector<Task> tasks;  // current epoch's open tasks, padded entries absent
  std::optional<DistributedSimplexAgent> agent;
  std::int64_t epoch = 0;
  bool applied = false;
  int target = -1;
  Eigen::Vector2d target_pos = Eigen::Vector2d::Zero();
  double target_since = 0.0;
  std::optional<int> completed_now;
  std::optional<int> assigned_now;
};

}  // namespace

TaskFlowResult dynamic_assignment_loop(const TaskFlowConfig& cfg, const TaskFlowObserver& observer) {
  const int n = static_cast<int>(cfg.robots.size());
  if (n < 1) throw InvalidParameterError("no robots");
  if (cfg.graph.size() != n) throw ShapeError("robot graph size differs from robot count");
  const int initial = cfg.initial_tasks > 0 ? cfg.initial_tasks : n;
  if (initial > n) throw InvalidParameterError("more initial tasks than robots");
  const int cloud_id = n;
  const double dt = cfg.integrator.dt;

  DistributedSimplexOptions opts = cfg.options;
  if (opts.diameter_bound <= 0) opts.diameter_bound = std::max(1, n - 1);

  auto peer_bus = std::make_shared<Bus>();
  auto cloud_bus = std::make_shared<Bus>();
  CommGraph star(n + 1);
  for (int i = 0; i < n; ++i) star.add_undirected_edge(i, cloud_id);

  std::vector<Communicator> peer, uplink;
  std::vector<NeighborSets> nb;
  for (int i = 0; i < n; ++i) {
    peer.push_back(Communicator::make_static(peer_bus, i, cfg.graph));
    nb.push_back(peer.back().base_neighbors());
    uplink.emplace_back(cloud_bus, i, CommProfile::Static, EdgeSchedule::always(star),
                        TransportConfig{}, std::size_t{1});
  }
  Communicator cloud_comm = Communicator::make_static(cloud_bus, cloud_id, star);
  std::vector<AgentId> robot_ids(n);
  for (int i = 0; i < n; ++i) robot_ids[i] = i;

  CloudState cloud = make_cloud(cfg.tasks, initial);
  TaskFlowResult out;
  std::map<int, double> reveal_time;
  for (const auto& t : cloud.revealed) {
    reveal_time[t.task_id] = 0.0;
    out.events.push_back({0.0, TaskEventKind::Reveal, t.task_id, -1, 0});
  }

  std::vector<UnicycleState> states = cfg.robots;
  std::vector<RobotSide> side(n);
  std::vector<int> targets(n, -1);
  std::int64_t epoch = 0;
  bool need_broadcast = true;
  Eigen::MatrixXd epoch_cost;
  bool epoch_recorded = true;
  const Eigen::Vector2d dummy_pos = Eigen::Vector2d::Zero();
  const auto total = cfg.tasks.size();

  double t = 0.0;
  for (std::uint64_t tick = 0;; ++tick) {
    t = static_cast<double>(tick) * dt;

    // Cloud: fold in completions, then broadcast if anything changed.
    for (int i = 0; i < n; ++i) {
      while (auto v = cloud_comm.asynchronous_receive(i)) {
        const int id = completion_from_payload(*v);
        if (cloud.completed.contains(id)) continue;
        auto upd = cloud_complete(std::move(cloud), id);
        cloud = std::move(upd.cloud);
        out.events.push_back({t, TaskEventKind::Complete, id, i, epoch});
        out.gantt.push_back({id, reveal_time.at(id), side[i].target_since, i, t});
        need_broadcast = true;
        if (upd.revealed) {
          reveal_time[upd.revealed->task_id] = t;
          out.events.push_back({t, TaskEventKind::Reveal, upd.revealed->task_id, -1, epoch});
        }
      }
    }
    if (cloud.completed.size() == total) {
      out.all_completed = true;
      if (observer) observer({t, nullptr, nullptr, &out});
      break;
    }
    if (t > cfg.max_time) break;
    if (need_broadcast) {
      ++epoch;
      const auto open = cloud.open_tasks();
      if (static_cast<int>(open.size()) > n) throw CloudError("more open tasks than robots");
      ValueMap msg = task_list_payload(open).as<ValueMap>();
      msg.emplace_back("epoch", Value(epoch));
      cloud_comm.send(Value(std::move(msg)), robot_ids, tick);
      out.events.push_back({t, TaskEventKind::Broadcast, -1, -1, epoch});
      need_broadcast = false;
      epoch_cost = Eigen::MatrixXd::Zero(n, n);
      epoch_recorded = false;
    }

    // Robots, publish half: pick up a new task list, send the basis.
    for_each_agent(n, cfg.execution, [&](int i) {
      RobotSide& r = side[i];
      r.completed_now.reset();
      r.assigned_now.reset();
      if (auto v = uplink[i].asynchronous_receive(cloud_id)) {
        r.tasks = task_list_from_payload(*v);
        r.epoch = v->at("epoch").as_int();
        std::vector<Eigen::Vector2d> pos;
        for (const auto& task : r.tasks) pos.push_back(task.position);
        const Eigen::Vector2d here(states[i].x, states[i].y);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        if (!pos.empty()) c.head(static_cast<Eigen::Index>(pos.size())) = costs_from_positions(here, pos);
        epoch_cost.row(i) = c.transpose();
        r.agent.emplace(i, n, c, opts, r.epoch);
        r.applied = false;
      }
      if (r.agent) peer[i].send(r.agent->outgoing(), nb[i].out, tick);
    });

    // Robots, collect half: pivot, apply a finished assignment, drive.
    for_each_agent(n, cfg.execution, [&](int i) {
      RobotSide& r = side[i];
      if (r.agent) {
        r.agent->absorb(peer[i].gather(nb[i].in, tick, opts.receive_timeout_s));
        if (r.agent->halted() && !r.applied) {
          r.applied = true;
          const int k = r.agent->assigned_task();
          const int task = k < static_cast<int>(r.tasks.size()) ? r.tasks[k].task_id : -1;
          if (task != r.target) {
            r.target = task;
            r.target_pos = task >= 0 ? r.tasks[k].position : dummy_pos;
            r.target_since = t;
            if (task >= 0) r.assigned_now = task;
          }
        }
      }
      UnicycleCmd cmd;
      if (r.target >= 0) {
        const Eigen::Vector2d here(states[i].x, states[i].y);
        if ((r.target_pos - here).norm() <= cfg.tracker.arrive_radius) {
          const AgentId to[] = {cloud_id};
          uplink[i].send(completion_payload(r.target), to, tick);
          r.completed_now = r.target;
          r.target = -1;
        } else {
          cmd = track_point(states[i], r.target_pos, cfg.tracker);
        }
      }
      states[i] = std::get<UnicycleState>(step(states[i], cmd, cfg.integrator));
    });

    for (int i = 0; i < n; ++i) {
      targets[i] = side[i].target;
      if (side[i].assigned_now)
        out.events.push_back({t, TaskEventKind::Assign, *side[i].assigned_now, i, side[i].epoch});
    }
    if (!epoch_recorded &&
        std::all_of(side.begin(), side.end(), [&](const RobotSide& r) {
          return r.agent && r.epoch == epoch && r.agent->halted();
        })) {
      epoch_recorded = true;
      const auto perm = side[0].agent->permutation();
      std::vector<int> ids(n, -1);
      for (int i = 0; i < n; ++i) {
        const int k = perm[i];
        ids[i] = k < static_cast<int>(side[0].tasks.size()) ? side[0].tasks[k].task_id : -1;
      }
      out.epoch_assignments.push_back(ids);
      out.epoch_costs.push_back(lp::assignment_cost(epoch_cost, perm));
      out.epoch_optimal_costs.push_back(lp::hungarian({n, epoch_cost}).objective);
    }
    if (observer) observer({t + dt, &states, &targets, &out});
  }

  out.epochs = static_cast<int>(epoch);
  out.end_time = t;
  out.final_states = states;
  return out;
}

}  // namespace robonet
