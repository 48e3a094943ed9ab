#include "robonet/sim/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "robonet/error.hpp"
#include "robonet/guidance.hpp"
#include "robonet/lockstep.hpp"
#include "robonet/mpc.hpp"
#include "robonet/sim/trace.hpp"
#include "robonet/task_flow.hpp"

namespace robonet::sim {

using nlohmann::json;

namespace {

std::uint64_t ticks_for(const ScenarioConfig& cfg) {
  return static_cast<std::uint64_t>(std::llround(cfg.duration / cfg.dt));
}

std::vector<Eigen::Vector2d> random_points(std::mt19937_64& rng, int n, double half_width) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  std::vector<Eigen::Vector2d> out;
  for (int i = 0; i < n; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    out.emplace_back(x, y);
  }
  return out;
}

json pose_payload(const AgentSpec& spec, const RobotState& s) {
  json p;
  if (const auto* u = std::get_if<UnicycleState>(&s)) {
    p["x"] = u->x;
    p["y"] = u->y;
    p["theta"] = u->theta;
    if (spec.use_si_to_unicycle) {
      const auto l = lookahead_point(*u, spec.mapping.lookahead);
      p["point"] = {l.x(), l.y()};
    }
  } else {
    const Vec pos = position_of(s);
    p["x"] = pos[0];
    p["y"] = pos.size() > 1 ? pos[1] : 0.0;
  }
  return p;
}

json input_payload(const ControlInput& u) {
  json p;
  if (const auto* c = std::get_if<UnicycleCmd>(&u)) {
    p["v"] = c->v;
    p["omega"] = c->omega;
  } else if (const auto* c = std::get_if<VelocityCmd>(&u)) {
    p["velocity"] = std::vector<double>(c->u.data(), c->u.data() + c->u.size());
  } else {
    const auto& a = std::get<AccelCmd>(u).a;
    p["accel"] = std::vector<double>(a.data(), a.data() + a.size());
  }
  return p;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(); }

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

void run_guidance(const ScenarioConfig& cfg, TraceWriter& w) {
  const auto specs = guidance_agents(cfg);
  const int n = cfg.n;
  auto bus = std::make_shared<Bus>();
  EdgeSchedule schedule(cfg.graph, cfg.comm.profile == CommProfile::Static ? 1.0 : cfg.comm.activation_prob,
                        cfg.seed);
  TransportConfig transport{cfg.comm.drop_prob, cfg.comm.latency, 0.0, cfg.seed};
  std::vector<Communicator> comms;
  std::vector<VelocityLaw> laws;
  std::vector<RobotState> states;
  for (const auto& s : specs) {
    validate_spec(s);
    comms.emplace_back(bus, s.id, cfg.comm.profile, schedule, transport);
    laws.push_back(make_law(s));
    states.push_back(s.initial_state);
  }
  for (int i = 0; i < n; ++i) w.write({0.0, i, RecordKind::Pose, pose_payload(specs[i], states[i])});

  std::vector<TraceRecord> buffer(static_cast<std::size_t>(n)), inputs(static_cast<std::size_t>(n));
  BusStats seen;
  const auto ticks = ticks_for(cfg);
  for (std::uint64_t k = 0; k < ticks; ++k) {
    const double t_now = static_cast<double>(k) * cfg.dt;
    bus->set_time(t_now);
    for_each_agent(n, cfg.execution, [&](int i) {
      guidance_publish(comms[i], guided_point(specs[i], states[i]), k);
    });
    const double t_next = static_cast<double>(k + 1) * cfg.dt;
    for_each_agent(n, cfg.execution, [&](int i) {
      const Vec v = guidance_evaluate(comms[i], guided_point(specs[i], states[i]), laws[i], k);
      const ControlInput u = control_input(specs[i], states[i], v);
      if (cfg.trace_inputs) inputs[i] = {t_now, i, RecordKind::Input, input_payload(u)};
      states[i] = step(states[i], u, specs[i].integrator);
      buffer[i] = {t_next, i, RecordKind::Pose, pose_payload(specs[i], states[i])};
    });
    if (cfg.trace_inputs)
      for (const auto& r : inputs) w.write(r);
    if (cfg.trace_messages) {
      // Bus traffic of this tick, attributed to the system id n.
      const BusStats now = bus->stats();
      w.write({t_now, n, RecordKind::Message,
               {{"posted", now.posted - seen.posted},
                {"delivered", now.delivered - seen.delivered},
                {"dropped", now.dropped - seen.dropped}}});
      seen = now;
    }
    for (const auto& r : buffer) w.write(r);
  }
}

json run_assignment(const ScenarioConfig& cfg, TraceWriter& w) {
  const auto& blk = *cfg.assignment;
  TaskFlowConfig tf;
  tf.robots = blk.robots;
  tf.tasks = blk.tasks;
  tf.initial_tasks = blk.initial;
  tf.graph = cfg.graph;
  tf.tracker = blk.tracker;
  tf.integrator.dt = cfg.dt;
  tf.max_time = cfg.duration;
  tf.execution = cfg.execution;
  const int n = cfg.n;
  const int system_id = n;

  for (int i = 0; i < n; ++i) {
    const auto& r = blk.robots[static_cast<std::size_t>(i)];
    w.write({0.0, i, RecordKind::Pose, {{"x", r.x}, {"y", r.y}, {"theta", r.theta}}});
  }
  std::size_t events_seen = 0, epochs_seen = 0;
  auto observer = [&](const TaskFlowSnapshot& snap) {
    const auto& prog = *snap.progress;
    for (; events_seen < prog.events.size(); ++events_seen) {
      const auto& e = prog.events[events_seen];
      json p{{"event", to_string(e.kind)}, {"task", e.task_id}, {"epoch", e.epoch}};
      if (e.kind == TaskEventKind::Complete) {
        for (const auto& g : prog.gantt) {
          if (g.task_id != e.task_id) continue;
          p["robot"] = g.robot;
          p["reveal_time"] = g.reveal_time;
          p["assign_time"] = g.assign_time;
        }
      }
      w.write({e.time, e.robot >= 0 ? e.robot : system_id, RecordKind::TaskEvent, p});
    }
    for (; epochs_seen < prog.epoch_assignments.size(); ++epochs_seen) {
      json p{{"epoch_index", epochs_seen},
             {"tasks", prog.epoch_assignments[epochs_seen]},
             {"cost", prog.epoch_costs[epochs_seen]},
             {"optimal_cost", prog.epoch_optimal_costs[epochs_seen]}};
      w.write({snap.robots ? snap.time - cfg.dt : snap.time, system_id, RecordKind::Assignment, p});
    }
    if (!snap.robots) return;
    for (int i = 0; i < n; ++i) {
      const auto& r = (*snap.robots)[static_cast<std::size_t>(i)];
      w.write({snap.time, i, RecordKind::Pose,
               {{"x", r.x}, {"y", r.y}, {"theta", r.theta}, {"target", (*snap.targets)[static_cast<std::size_t>(i)]}}});
    }
  };
  const auto res = dynamic_assignment_loop(tf, observer);
  json extra;
  extra["all_completed"] = res.all_completed;
  extra["epochs"] = res.epochs;
  extra["end_time"] = res.end_time;
  json gantt = json::array();
  for (const auto& g : res.gantt)
    gantt.push_back({{"task", g.task_id}, {"reveal_time", g.reveal_time}, {"assign_time", g.assign_time},
                     {"robot", g.robot}, {"complete_time", g.complete_time}});
  extra["gantt"] = gantt;
  return extra;
}

json run_mpc(const ScenarioConfig& cfg, TraceWriter& w) {
  const auto& blk = *cfg.mpc;
  const auto plans = bootstrap_joint_plans(blk.agents);
  const auto res = run_distributed_mpc(blk.agents, plans, blk.steps);
  for (const auto& row : res.rows) {
    const auto& s = blk.agents[static_cast<std::size_t>(row.agent)];
    const double stage = (s.q.array() * (row.state - s.x_ref).array().abs()).sum() +
                         (s.r.array() * (row.input - s.u_ref).array().abs()).sum();
    w.write({row.step * cfg.dt, row.agent, RecordKind::MpcResidual,
             {{"step", row.step},
              {"state", vec_json(row.state)},
              {"input", vec_json(row.input)},
              {"output", vec_json(row.output)},
              {"coupling_residual", nullable(row.coupling_residual)},
              {"stage_cost", stage}}});
  }
  json extra;
  extra["recursively_feasible"] = res.recursively_feasible;
  return extra;
}

}  // namespace

std::vector<AgentSpec> guidance_agents(const ScenarioConfig& cfg) {
  const int n = cfg.n;
  std::mt19937_64 rng(cfg.seed);
  std::vector<AgentSpec> specs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    specs[i].id = i;
    specs[i].period = cfg.dt;
    specs[i].integrator.dt = cfg.dt;
  }
  switch (cfg.scenario) {
    case ScenarioKind::Containment: {
      const auto& b = *cfg.containment;
      for (int i = 0; i < n; ++i) {
        auto& s = specs[i];
        const bool leader = std::find(b.leaders.begin(), b.leaders.end(), i) != b.leaders.end();
        s.role = leader ? AgentRole::Leader : AgentRole::Follower;
        s.guidance = GuidanceKind::Containment;
        s.gain = b.gain;
        s.initial_state = SingleIntState{b.positions[static_cast<std::size_t>(i)]};
      }
      break;
    }
    case ScenarioKind::Formation: {
      const auto& b = *cfg.formation;
      std::vector<Eigen::Vector2d> pos = b.positions;
      if (pos.empty()) {
        if (n == 6) {
          std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
          std::uniform_real_distribution<double> shift(-1.0, 1.0);
          std::uniform_real_distribution<double> noise(-b.perturbation, b.perturbation);
          const double a = angle(rng);
          const Eigen::Rotation2Dd rot(a);
          const double tx = shift(rng);
          const double ty = shift(rng);
          for (int k = 0; k < n; ++k) {
            const double nx = noise(rng);
            const double ny = noise(rng);
            pos.push_back(rot * FormationSpec::hexagon_vertex(k) + Eigen::Vector2d(tx + nx, ty + ny));
          }
        } else {
          pos = random_points(rng, n, 2.0);
        }
      }
      std::uniform_real_distribution<double> heading(-std::numbers::pi, std::numbers::pi);
      for (int i = 0; i < n; ++i) {
        auto& s = specs[i];
        s.guidance = GuidanceKind::Formation;
        s.formation = b.spec;
        s.model = b.model;
        if (b.model == ModelKind::Unicycle) {
          s.use_si_to_unicycle = true;
          s.mapping = b.mapping;
          const double th = heading(rng);
          // Place the look-ahead point, not the axle, at the drawn position.
          const Eigen::Vector2d& p = pos[static_cast<std::size_t>(i)];
          s.initial_state = UnicycleState{p.x() - b.mapping.lookahead * std::cos(th),
                                          p.y() - b.mapping.lookahead * std::sin(th), th};
        } else {
          s.initial_state = SingleIntState{pos[static_cast<std::size_t>(i)]};
        }
      }
      break;
    }
    case ScenarioKind::Rendezvous: {
      auto pos = cfg.rendezvous->positions;
      if (pos.empty()) pos = random_points(rng, n, 5.0);
      for (int i = 0; i < n; ++i) {
        specs[i].guidance = GuidanceKind::Rendezvous;
        specs[i].initial_state = SingleIntState{pos[static_cast<std::size_t>(i)]};
      }
      break;
    }
    default:
      throw ConfigError("scenario: " + std::string(to_string(cfg.scenario)) + " has no guidance agents");
  }
  return specs;
}

json run_scenario(const ScenarioConfig& cfg, std::ostream& trace_out) {
  std::ostringstream buf;
  json extra = json::object();
  {
    TraceWriter w(buf, to_string(cfg.scenario), cfg.document);
    try {
      switch (cfg.scenario) {
        case ScenarioKind::Containment:
        case ScenarioKind::Formation:
        case ScenarioKind::Rendezvous:
          run_guidance(cfg, w);
          break;
        case ScenarioKind::Assignment:
          extra = run_assignment(cfg, w);
          break;
        case ScenarioKind::Mpc:
          extra = run_mpc(cfg, w);
          break;
      }
    } catch (...) {
      trace_out << buf.str();
      trace_out.flush();
      throw;
    }
  }
  const std::string text = buf.str();
  trace_out << text;
  trace_out.flush();
  std::istringstream in(text);
  json summary = summarize(read_trace(in));
  for (auto it = extra.begin(); it != extra.end(); ++it)
    if (it.key() != "gantt") summary[it.key()] = it.value();
  if (extra.contains("gantt")) summary["gantt"] = extra["gantt"];
  return summary;
}

json run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream trace(out_dir / "trace.jsonl", std::ios::binary);
  if (!trace) throw TraceError("cannot write " + (out_dir / "trace.jsonl").string());
  const json summary = run_scenario(cfg, trace);
  trace.close();
  std::ofstream(out_dir / "summary.json") << summary.dump(2) << '\n';
  if (cfg.scenario == ScenarioKind::Assignment) export_csv(read_trace(out_dir / "trace.jsonl"), out_dir);
  return summary;
}

std::vector<json> run_batch(const json& document, const std::vector<std::uint64_t>& seeds, Execution execution) {
  std::vector<json> out(seeds.size());
  for_each_agent(static_cast<int>(seeds.size()), execution, [&](int k) {
    json doc = document;
    doc["seed"] = seeds[static_cast<std::size_t>(k)];
    doc["execution"] = "serial";
    const ScenarioConfig cfg = parse_config(doc);
    std::ostringstream sink;
    out[static_cast<std::size_t>(k)] = run_scenario(cfg, sink);
  });
  return out;
}

}  // namespace robonet::sim
