#include "robonet/sim/config.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "robonet/error.hpp"

namespace robonet::sim {

using nlohmann::json;

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Containment:
      return "containment";
    case ScenarioKind::Formation:
      return "formation";
    case ScenarioKind::Rendezvous:
      return "rendezvous";
    case ScenarioKind::Assignment:
      return "assignment";
    case ScenarioKind::Mpc:
      return "mpc";
  }
  return "?";
}

ScenarioKind scenario_from_string(std::string_view name) {
  for (auto k : {ScenarioKind::Containment, ScenarioKind::Formation, ScenarioKind::Rendezvous,
                 ScenarioKind::Assignment, ScenarioKind::Mpc})
    if (name == to_string(k)) return k;
  throw ConfigError("scenario: unknown scenario '" + std::string(name) + "'");
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
  throw ConfigError(path + ": " + why);
}

std::string at(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string at(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(at(path, key), "missing field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

/// A number, or null for an unbounded side.
double bound(const json& j, const std::string& path, double unbounded) {
  if (j.is_null()) return unbounded;
  return number(j, path);
}

std::int64_t integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

Eigen::VectorXd vector(const json& j, const std::string& path) {
  array(j, path);
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = number(j[k], at(path, k));
  return v;
}

Eigen::MatrixXd matrix(const json& j, const std::string& path) {
  array(j, path);
  if (j.empty()) fail(path, "expected a non-empty matrix");
  const std::size_t cols = array(j[0], at(path, 0)).size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto& row = array(j[r], at(path, r));
    if (row.size() != cols) fail(at(path, r), "ragged matrix row");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(row[c], at(at(path, r), c));
  }
  return m;
}

std::vector<Eigen::Vector2d> points(const json& j, const std::string& path) {
  std::vector<Eigen::Vector2d> out;
  if (j.is_null()) return out;
  array(j, path);
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto v = vector(j[k], at(path, k));
    if (v.size() != 2) fail(at(path, k), "expected [x, y]");
    out.emplace_back(v[0], v[1]);
  }
  return out;
}

double get_number(const json& j, const std::string& key, const std::string& path) {
  return number(field(j, key, path), at(path, key));
}

json pts(const std::vector<Eigen::Vector2d>& p) {
  json a = json::array();
  for (const auto& v : p) a.push_back({v.x(), v.y()});
  return a;
}

int default_n(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Containment:
    case ScenarioKind::Formation:
      return 6;
    case ScenarioKind::Rendezvous:
    case ScenarioKind::Assignment:
      return 4;
    case ScenarioKind::Mpc:
      return 2;
  }
  return 1;
}

CommProfile profile_from(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  const auto s = j.get<std::string>();
  for (auto p : {CommProfile::Static, CommProfile::TimeVarying, CommProfile::BestEffort})
    if (s == to_string(p)) return p;
  fail(path, "unknown profile '" + s + "'");
}

OcpSpec parse_ocp(const json& j, const json& coupling, int T_default, const std::string& path) {
  OcpSpec s;
  s.model.A = matrix(field(j, "A", path), at(path, "A"));
  s.model.B = matrix(field(j, "B", path), at(path, "B"));
  s.model.C = matrix(field(j, "C", path), at(path, "C"));
  s.model.D = matrix(field(j, "D", path), at(path, "D"));
  s.model.x0 = vector(field(j, "x0", path), at(path, "x0"));
  s.T = static_cast<int>(j.contains("T") ? integer(j["T"], at(path, "T")) : T_default);
  const int nx = static_cast<int>(s.model.A.rows());
  const int nu = static_cast<int>(s.model.B.cols());
  auto box = [&](const char* key, int dim) {
    if (!j.contains(key) || j[key].is_null()) return Polyhedron::whole(dim);
    const std::string p = at(path, key);
    const auto& lo = array(field(j[key], "lo", p), at(p, "lo"));
    const auto& hi = array(field(j[key], "hi", p), at(p, "hi"));
    if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim) fail(p, "bounds need one entry per component");
    Eigen::VectorXd l(dim), h(dim);
    for (int k = 0; k < dim; ++k) {
      l[k] = bound(lo[static_cast<std::size_t>(k)], at(at(p, "lo"), static_cast<std::size_t>(k)), -std::numeric_limits<double>::infinity());
      h[k] = bound(hi[static_cast<std::size_t>(k)], at(at(p, "hi"), static_cast<std::size_t>(k)), std::numeric_limits<double>::infinity());
    }
    return Polyhedron::box(l, h);
  };
  s.X = box("x_box", nx);
  s.U = box("u_box", nu);
  auto vec_or = [&](const char* key, Eigen::VectorXd def) {
    return j.contains(key) ? vector(j[key], at(path, key)) : def;
  };
  s.q = vec_or("q", Eigen::VectorXd::Ones(nx));
  s.r = vec_or("r", Eigen::VectorXd::Zero(nu));
  s.x_bar = vec_or("x_bar", Eigen::VectorXd::Zero(nx));
  s.u_bar = vec_or("u_bar", Eigen::VectorXd::Zero(nu));
  s.x_ref = vec_or("x_ref", s.x_bar);
  s.u_ref = vec_or("u_ref", s.u_bar);
  const int nz = static_cast<int>(s.model.C.rows());
  if (coupling.is_null()) {
    s.S = Polyhedron::whole(nz);
  } else {
    s.S.G = matrix(field(coupling, "H", "mpc.coupling"), "mpc.coupling.H");
    s.S.g = vector(field(coupling, "h", "mpc.coupling"), "mpc.coupling.h");
  }
  try {
    s.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return s;
}

}  // namespace

CommGraph graph_from_json(const json& j, int n, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  if (j.contains("matrix")) {
    const auto& m = array(j["matrix"], at(path, "matrix"));
    if (static_cast<int>(m.size()) != n) fail(at(path, "matrix"), "expected " + std::to_string(n) + " rows");
    std::vector<std::vector<int>> rows;
    for (std::size_t r = 0; r < m.size(); ++r) {
      const auto& row = array(m[r], at(at(path, "matrix"), r));
      if (static_cast<int>(row.size()) != n) fail(at(at(path, "matrix"), r), "expected " + std::to_string(n) + " entries");
      std::vector<int> out;
      for (std::size_t c = 0; c < row.size(); ++c) {
        const auto v = integer(row[c], at(at(at(path, "matrix"), r), c));
        if (v != 0 && v != 1) fail(at(at(at(path, "matrix"), r), c), "entries must be 0 or 1");
        out.push_back(static_cast<int>(v));
      }
      rows.push_back(std::move(out));
    }
    try {
      return CommGraph::from_matrix(rows);
    } catch (const Error& e) {
      fail(at(path, "matrix"), e.what());
    }
  }
  if (j.contains("edges")) {
    const bool undirected = j.contains("undirected") ? boolean(j["undirected"], at(path, "undirected")) : true;
    const auto& e = array(j["edges"], at(path, "edges"));
    std::vector<std::pair<int, int>> edges;
    for (std::size_t k = 0; k < e.size(); ++k) {
      const std::string p = at(at(path, "edges"), k);
      const auto& pair = array(e[k], p);
      if (pair.size() != 2) fail(p, "expected [from, to]");
      const auto a = integer(pair[0], at(p, 0));
      const auto b = integer(pair[1], at(p, 1));
      if (a < 0 || a >= n || b < 0 || b >= n) fail(p, "agent index outside [0, n)");
      if (a == b) fail(p, "self-loop");
      edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
    return CommGraph::from_edges(n, edges, undirected);
  }
  if (j.contains("erdos_renyi")) {
    const std::string p = at(path, "erdos_renyi");
    const auto& er = j["erdos_renyi"];
    const double prob = get_number(er, "p", p);
    if (prob < 0.0 || prob > 1.0) fail(at(p, "p"), "probability outside [0, 1]");
    const auto seed = static_cast<std::uint64_t>(er.contains("seed") ? integer(er["seed"], at(p, "seed")) : 0);
    const bool connected = er.contains("connected") ? boolean(er["connected"], at(p, "connected")) : true;
    try {
      return erdos_renyi(n, prob, seed, connected);
    } catch (const Error& e) {
      fail(p, e.what());
    }
  }
  if (j.contains("complete") && boolean(j["complete"], at(path, "complete"))) return CommGraph::complete(n);
  fail(path, "expected one of matrix, edges, erdos_renyi, complete");
}

json default_document(ScenarioKind kind, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("n: must be at least 1");
  json d;
  d["version"] = kConfigVersion;
  d["scenario"] = to_string(kind);
  d["n"] = n;
  d["seed"] = seed;
  d["dt"] = 0.01;
  d["execution"] = "serial";
  d["communication"] = {{"profile", "static"}, {"activation_prob", 1.0}, {"drop_prob", 0.0}, {"latency", 0.0}};
  constexpr double pi = std::numbers::pi;
  switch (kind) {
    case ScenarioKind::Containment: {
      if (n < 2) throw ConfigError("n: containment needs at least one leader and one follower");
      const int leaders = n / 2;
      std::vector<Eigen::Vector2d> pos;
      json lead = json::array();
      for (int k = 0; k < leaders; ++k) {
        const double a = pi / 2 + 2 * pi * k / leaders;
        pos.emplace_back(3.0 * std::cos(a), 3.0 * std::sin(a));
        lead.push_back(k);
      }
      const int followers = n - leaders;
      for (int k = 0; k < followers; ++k) {
        const double a = pi / 6 + 2 * pi * k / followers;
        pos.emplace_back(7.0 * std::cos(a), 7.0 * std::sin(a));
      }
      json edges = json::array();
      for (int f = 0; f < followers; ++f) edges.push_back({leaders + f, f % leaders});
      if (followers == 2) edges.push_back({leaders, leaders + 1});
      if (followers > 2)
        for (int f = 0; f < followers; ++f) edges.push_back({leaders + f, leaders + (f + 1) % followers});
      d["duration"] = 30.0;
      d["graph"] = {{"edges", edges}, {"undirected", true}};
      d["communication"]["profile"] = "time_varying";
      d["communication"]["activation_prob"] = 0.5;
      d["containment"] = {{"leaders", lead}, {"gain", 1.0}, {"positions", pts(pos)}};
      break;
    }
    case ScenarioKind::Formation: {
      d["duration"] = 40.0;
      d["formation"] = {{"model", "single_integrator"}, {"positions", nullptr}, {"perturbation", 0.3},
                        {"lookahead", 0.1}};
      if (n == 6) {
        json pairs = json::array();
        const FormationSpec hex = FormationSpec::hexagon(1.0);
        for (const auto& [ij, dist] : hex.pairs())
          if (ij.first < ij.second) pairs.push_back({ij.first, ij.second, dist});
        d["formation"]["pairs"] = pairs;
      }
      break;
    }
    case ScenarioKind::Rendezvous:
      d["duration"] = 10.0;
      d["graph"] = {{"complete", true}};
      d["rendezvous"] = {{"positions", nullptr}};
      break;
    case ScenarioKind::Assignment: {
      d["duration"] = 600.0;
      d["graph"] = {{"erdos_renyi", {{"p", 0.2}, {"seed", seed}, {"connected", true}}}};
      json robots = json::array();
      for (int i = 0; i < n; ++i) robots.push_back({-4.0, -3.0 + 6.0 * (n == 1 ? 0.5 : double(i) / (n - 1)), 0.0});
      json tasks = json::array();
      for (int k = 0; k < 2 * n; ++k) {
        // Spread on a ring of growing radius so every reveal sits somewhere new.
        const double a = 2 * pi * k / (2 * n) + 0.3;
        const double rad = 1.5 + 0.25 * k;
        tasks.push_back({rad * std::cos(a), rad * std::sin(a)});
      }
      d["assignment"] = {{"robots", robots}, {"tasks", tasks}, {"initial", n},
                         {"tracker", {{"k_lin", 0.8}, {"k_ang", 2.0}, {"arrive_radius", 0.02}}}};
      break;
    }
    case ScenarioKind::Mpc: {
      d["duration"] = 30 * 0.01;
      json agents = json::array();
      for (int i = 0; i < n; ++i) {
        agents.push_back({{"A", {{1.0}}},
                          {"B", {{1.0}}},
                          {"C", {{1.0}}},
                          {"D", {{0.0}}},
                          {"x0", {0.1 * i}},
                          {"T", 10},
                          {"x_box", {{"lo", {-2.0}}, {"hi", {2.0}}}},
                          {"u_box", {{"lo", {-0.2}}, {"hi", {0.2}}}},
                          {"q", {1.0}},
                          {"r", {0.1}},
                          {"x_ref", {0.9}},
                          {"x_bar", {1.0 / n}},
                          {"u_bar", {0.0}}});
      }
      d["mpc"] = {{"agents", agents}, {"coupling", {{"H", {{1.0}}}, {"h", {1.0}}}}, {"steps", 30}};
      break;
    }
  }
  if (!d.contains("graph") && kind != ScenarioKind::Formation) d["graph"] = {{"complete", true}};
  return d;
}

ScenarioConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("document: ") + e.what());
  }
  return parse_config(doc);
}

ScenarioConfig parse_config(const json& user) {
  if (!user.is_object()) fail("document", "expected an object");
  const json& scen = field(user, "scenario", "");
  if (!scen.is_string()) fail("scenario", "expected a string");
  const ScenarioKind kind = scenario_from_string(scen.get<std::string>());
  const int n = static_cast<int>(user.contains("n") ? integer(user["n"], "n") : default_n(kind));
  if (n < 1) fail("n", "must be at least 1");
  const auto seed = static_cast<std::uint64_t>(user.contains("seed") ? integer(user["seed"], "seed") : 0);

  json doc;
  try {
    doc = default_document(kind, n, seed);
  } catch (const ConfigError&) {
    doc = json::object();
  }
  doc.merge_patch(user);

  ScenarioConfig cfg;
  cfg.scenario = kind;
  cfg.n = n;
  cfg.seed = seed;
  cfg.version = static_cast<int>(integer(field(doc, "version", ""), "version"));
  if (cfg.version != kConfigVersion)
    fail("version", "unsupported version " + std::to_string(cfg.version) + " (expected " + std::to_string(kConfigVersion) + ")");
  cfg.dt = doc.contains("dt") ? number(doc["dt"], "dt") : 0.01;
  doc["dt"] = cfg.dt;
  if (!(cfg.dt > 0.0)) fail("dt", "must be positive");
  cfg.duration = doc.contains("duration") ? number(doc["duration"], "duration") : 30.0;
  doc["duration"] = cfg.duration;
  if (cfg.duration < 0.0) fail("duration", "must be non-negative");
  if (doc.contains("execution")) {
    const auto& e = doc["execution"];
    if (e == "serial")
      cfg.execution = Execution::Serial;
    else if (e == "parallel")
      cfg.execution = Execution::Parallel;
    else
      fail("execution", "expected serial or parallel");
  }

  if (doc.contains("trace")) {
    const auto& tr = doc["trace"];
    if (!tr.is_object()) fail("trace", "expected an object");
    if (tr.contains("inputs")) cfg.trace_inputs = boolean(tr["inputs"], "trace.inputs");
    if (tr.contains("messages")) cfg.trace_messages = boolean(tr["messages"], "trace.messages");
  }

  if (doc.contains("communication")) {
    const auto& c = doc["communication"];
    const std::string p = "communication";
    if (c.contains("profile")) cfg.comm.profile = profile_from(c["profile"], at(p, "profile"));
    if (c.contains("activation_prob")) cfg.comm.activation_prob = number(c["activation_prob"], at(p, "activation_prob"));
    if (c.contains("drop_prob")) cfg.comm.drop_prob = number(c["drop_prob"], at(p, "drop_prob"));
    if (c.contains("latency")) cfg.comm.latency = number(c["latency"], at(p, "latency"));
    if (cfg.comm.activation_prob < 0.0 || cfg.comm.activation_prob > 1.0)
      fail(at(p, "activation_prob"), "probability outside [0, 1]");
    if (cfg.comm.drop_prob < 0.0 || cfg.comm.drop_prob > 1.0) fail(at(p, "drop_prob"), "probability outside [0, 1]");
    if (cfg.comm.drop_prob > 0.0 && cfg.comm.profile != CommProfile::BestEffort)
      fail(at(p, "drop_prob"), "only the best_effort profile may drop messages");
    if (cfg.comm.latency < 0.0) fail(at(p, "latency"), "must be non-negative");
  }

  switch (kind) {
    case ScenarioKind::Containment: {
      const auto& b = field(doc, "containment", "");
      ContainmentBlock blk;
      const auto& leaders = array(field(b, "leaders", "containment"), "containment.leaders");
      for (std::size_t k = 0; k < leaders.size(); ++k) {
        const auto l = integer(leaders[k], at("containment.leaders", k));
        if (l < 0 || l >= n) fail(at("containment.leaders", k), "leader is not an agent");
        blk.leaders.push_back(static_cast<int>(l));
      }
      if (blk.leaders.empty()) fail("containment.leaders", "at least one leader required");
      if (b.contains("gain")) blk.gain = number(b["gain"], "containment.gain");
      if (!(blk.gain > 0.0)) fail("containment.gain", "must be positive");
      blk.positions = points(field(b, "positions", "containment"), "containment.positions");
      if (static_cast<int>(blk.positions.size()) != n) fail("containment.positions", "expected one position per agent");
      cfg.containment = blk;
      break;
    }
    case ScenarioKind::Formation: {
      const auto& b = field(doc, "formation", "");
      FormationBlock blk;
      const auto& model = field(b, "model", "formation");
      if (model == "single_integrator")
        blk.model = ModelKind::SingleIntegrator;
      else if (model == "unicycle")
        blk.model = ModelKind::Unicycle;
      else
        fail("formation.model", "expected single_integrator or unicycle");
      if (!b.contains("pairs")) fail("formation.pairs", "required unless n = 6 (hexagon default)");
      const auto& pairs = array(b["pairs"], "formation.pairs");
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const std::string p = at("formation.pairs", k);
        const auto& e = array(pairs[k], p);
        if (e.size() != 3) fail(p, "expected [i, j, distance]");
        const auto i = integer(e[0], at(p, 0));
        const auto jj = integer(e[1], at(p, 1));
        const double dist = number(e[2], at(p, 2));
        if (i < 0 || i >= n || jj < 0 || jj >= n || i == jj) fail(p, "pair must join two distinct agents");
        if (!(dist > 0.0)) fail(at(p, 2), "distance must be positive");
        blk.spec.add_pair(static_cast<int>(i), static_cast<int>(jj), dist);
      }
      blk.positions = points(b.contains("positions") ? b["positions"] : json(), "formation.positions");
      if (!blk.positions.empty() && static_cast<int>(blk.positions.size()) != n)
        fail("formation.positions", "expected one position per agent");
      if (b.contains("perturbation")) blk.perturbation = number(b["perturbation"], "formation.perturbation");
      if (b.contains("lookahead")) blk.mapping.lookahead = number(b["lookahead"], "formation.lookahead");
      if (!(blk.mapping.lookahead > 0.0)) fail("formation.lookahead", "must be positive");
      if (!doc.contains("graph")) doc["graph"] = {{"matrix", blk.spec.graph(n).matrix()}};
      cfg.formation = blk;
      break;
    }
    case ScenarioKind::Rendezvous: {
      RendezvousBlock blk;
      if (doc.contains("rendezvous"))
        blk.positions = points(doc["rendezvous"].contains("positions") ? doc["rendezvous"]["positions"] : json(),
                               "rendezvous.positions");
      if (!blk.positions.empty() && static_cast<int>(blk.positions.size()) != n)
        fail("rendezvous.positions", "expected one position per agent");
      cfg.rendezvous = blk;
      break;
    }
    case ScenarioKind::Assignment: {
      const auto& b = field(doc, "assignment", "");
      AssignmentBlock blk;
      const auto& robots = array(field(b, "robots", "assignment"), "assignment.robots");
      for (std::size_t k = 0; k < robots.size(); ++k) {
        const auto v = vector(robots[k], at("assignment.robots", k));
        if (v.size() != 3) fail(at("assignment.robots", k), "expected [x, y, theta]");
        blk.robots.push_back({v[0], v[1], wrap_angle(v[2])});
      }
      if (static_cast<int>(blk.robots.size()) != n) fail("assignment.robots", "expected one robot per agent");
      blk.tasks = points(field(b, "tasks", "assignment"), "assignment.tasks");
      if (blk.tasks.empty()) fail("assignment.tasks", "at least one task required");
      blk.initial = static_cast<int>(b.contains("initial") ? integer(b["initial"], "assignment.initial") : n);
      if (blk.initial < 1 || blk.initial > n) fail("assignment.initial", "must lie in [1, n]");
      if (blk.initial > static_cast<int>(blk.tasks.size())) fail("assignment.initial", "more initial tasks than tasks");
      if (b.contains("tracker")) {
        const auto& t = b["tracker"];
        if (t.contains("k_lin")) blk.tracker.k_lin = number(t["k_lin"], "assignment.tracker.k_lin");
        if (t.contains("k_ang")) blk.tracker.k_ang = number(t["k_ang"], "assignment.tracker.k_ang");
        if (t.contains("arrive_radius"))
          blk.tracker.arrive_radius = number(t["arrive_radius"], "assignment.tracker.arrive_radius");
      }
      cfg.assignment = blk;
      break;
    }
    case ScenarioKind::Mpc: {
      const auto& b = field(doc, "mpc", "");
      MpcBlock blk;
      const auto& agents = array(field(b, "agents", "mpc"), "mpc.agents");
      if (static_cast<int>(agents.size()) != n) fail("mpc.agents", "expected one model per agent");
      const json coupling = b.contains("coupling") ? b["coupling"] : json();
      for (std::size_t k = 0; k < agents.size(); ++k)
        blk.agents.push_back(parse_ocp(agents[k], coupling, 10, at("mpc.agents", k)));
      for (std::size_t k = 1; k < blk.agents.size(); ++k)
        if (blk.agents[k].T != blk.agents[0].T || blk.agents[k].model.nz() != blk.agents[0].model.nz())
          fail(at("mpc.agents", k), "agents must share horizon and output dimension");
      if (b.contains("steps")) blk.steps = static_cast<int>(integer(b["steps"], "mpc.steps"));
      if (blk.steps < 0) fail("mpc.steps", "must be non-negative");
      if (cfg.comm.profile == CommProfile::BestEffort)
        fail("communication.profile", "plan exchange requires a reliable profile");
      cfg.mpc = blk;
      break;
    }
  }

  cfg.graph = graph_from_json(field(doc, "graph", ""), n, "graph");
  if (cfg.formation) {
    for (const auto& [ij, dist] : cfg.formation->spec.pairs()) {
      if (!cfg.graph.has_edge(ij.first, ij.second))
        fail("formation.pairs", "distance declared for non-edge (" + std::to_string(ij.first) + ", " +
                                    std::to_string(ij.second) + ")");
    }
  }
  if (cfg.containment) {
    const std::set<int> leaders(cfg.containment->leaders.begin(), cfg.containment->leaders.end());
    if (static_cast<int>(leaders.size()) == n) fail("containment.leaders", "at least one follower required");
  }
  cfg.document = doc;
  return cfg;
}

}  // namespace robonet::sim
