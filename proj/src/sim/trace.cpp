#include "robonet/sim/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "robonet/error.hpp"
#include "robonet/guidance.hpp"
#include "robonet/sim/geometry.hpp"

namespace robonet::sim {

using nlohmann::json;

const char* to_string(RecordKind k) {
  switch (k) {
    case RecordKind::Pose:
      return "pose";
    case RecordKind::Input:
      return "input";
    case RecordKind::Message:
      return "message";
    case RecordKind::Assignment:
      return "assignment";
    case RecordKind::TaskEvent:
      return "task_event";
    case RecordKind::MpcResidual:
      return "mpc_residual";
  }
  return "?";
}

RecordKind record_kind_from_string(const std::string& s) {
  for (auto k : {RecordKind::Pose, RecordKind::Input, RecordKind::Message, RecordKind::Assignment,
                 RecordKind::TaskEvent, RecordKind::MpcResidual})
    if (s == to_string(k)) return k;
  throw TraceError("unknown record kind '" + s + "'");
}

json to_json(const TraceRecord& r) {
  json j;
  j["t"] = r.time;
  j["agent"] = r.agent;
  j["kind"] = to_string(r.kind);
  j["payload"] = r.payload;
  return j;
}

TraceWriter::TraceWriter(std::ostream& out, const std::string& scenario, const json& config) : out_(out) {
  json h;
  h["schema"] = kTraceSchema;
  h["version"] = kTraceVersion;
  h["scenario"] = scenario;
  h["config"] = config;
  out_ << h.dump() << '\n';
}

void TraceWriter::write(const TraceRecord& r) {
  out_ << to_json(r).dump() << '\n';
  ++count_;
}

Trace read_trace(std::istream& in) {
  Trace t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw TraceError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (t.header.is_null()) {
      if (!j.is_object() || j.value("schema", "") != kTraceSchema)
        throw TraceError("line 1: missing trace header");
      if (j.value("version", -1) != kTraceVersion)
        throw TraceError("trace schema version " + j.value("version", json(-1)).dump() + " is not supported (expected " +
                         std::to_string(kTraceVersion) + ")");
      t.header = std::move(j);
      continue;
    }
    try {
      TraceRecord r;
      r.time = j.at("t").get<double>();
      r.agent = j.at("agent").get<int>();
      r.kind = record_kind_from_string(j.at("kind").get<std::string>());
      r.payload = j.at("payload");
      t.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw TraceError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return t;
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace " + path.string());
  return read_trace(in);
}

namespace {

struct Series {
  std::vector<double> time;
  std::vector<double> value;
};

/// Positions per time stamp, from pose records. Uses the guided point when
/// the record carries one.
std::map<double, std::map<int, Eigen::Vector2d>> poses_by_time(const Trace& t) {
  std::map<double, std::map<int, Eigen::Vector2d>> out;
  for (const auto& r : t.records) {
    if (r.kind != RecordKind::Pose) continue;
    const auto& p = r.payload;
    Eigen::Vector2d v;
    if (p.contains("point"))
      v = {p["point"][0].get<double>(), p["point"][1].get<double>()};
    else
      v = {p.at("x").get<double>(), p.at("y").get<double>()};
    out[r.time][r.agent] = v;
  }
  return out;
}

Series containment_series(const Trace& t) {
  Series s;
  const auto& cfg = t.header.at("config");
  const auto leaders = cfg.at("containment").at("leaders").get<std::vector<int>>();
  const int n = cfg.at("n").get<int>();
  for (const auto& [time, pos] : poses_by_time(t)) {
    if (static_cast<int>(pos.size()) != n) continue;
    std::vector<Eigen::Vector2d> hull_pts;
    for (int l : leaders) hull_pts.push_back(pos.at(l));
    double worst = 0.0;
    for (const auto& [i, p] : pos)
      if (std::find(leaders.begin(), leaders.end(), i) == leaders.end())
        worst = std::max(worst, hull_distance(p, hull_pts));
    s.time.push_back(time);
    s.value.push_back(worst);
  }
  return s;
}

FormationSpec formation_from_header(const json& cfg) {
  FormationSpec spec;
  for (const auto& e : cfg.at("formation").at("pairs"))
    spec.add_pair(e[0].get<int>(), e[1].get<int>(), e[2].get<double>());
  return spec;
}

Series formation_series(const Trace& t) {
  Series s;
  const auto& cfg = t.header.at("config");
  const FormationSpec spec = formation_from_header(cfg);
  const int n = cfg.at("n").get<int>();
  for (const auto& [time, pos] : poses_by_time(t)) {
    if (static_cast<int>(pos.size()) != n) continue;
    std::vector<Vec> xs;
    for (const auto& [i, p] : pos) xs.push_back(p);
    s.time.push_back(time);
    s.value.push_back(formation_error(xs, spec));
  }
  return s;
}

Series spread_series(const Trace& t) {
  Series s;
  const int n = t.header.at("config").at("n").get<int>();
  for (const auto& [time, pos] : poses_by_time(t)) {
    if (static_cast<int>(pos.size()) != n) continue;
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& [i, p] : pos) c += p;
    c /= static_cast<double>(n);
    double worst = 0.0;
    for (const auto& [i, p] : pos) worst = std::max(worst, (p - c).norm());
    s.time.push_back(time);
    s.value.push_back(worst);
  }
  return s;
}

Series residual_series(const Trace& t) {
  Series s;
  for (const auto& r : t.records) {
    if (r.kind != RecordKind::MpcResidual || r.agent != 0) continue;
    s.time.push_back(r.time);
    const auto& v = r.payload.at("coupling_residual");
    s.value.push_back(v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>());
  }
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct GanttEntry {
  int task;
  double reveal, assign, complete;
  int robot;
};

std::vector<GanttEntry> gantt_rows(const Trace& t) {
  std::vector<GanttEntry> rows;
  for (const auto& r : t.records) {
    if (r.kind != RecordKind::TaskEvent || r.payload.value("event", "") != "complete") continue;
    rows.push_back({r.payload.at("task").get<int>(), r.payload.at("reveal_time").get<double>(),
                    r.payload.at("assign_time").get<double>(), r.time, r.payload.at("robot").get<int>()});
  }
  return rows;
}

}  // namespace

json summarize(const Trace& t) {
  json out = json::object();
  if (t.header.is_null()) return out;
  const std::string scenario = t.header.value("scenario", "");
  out["scenario"] = scenario;
  out["records"] = t.records.size();
  auto final_window = [](const Series& s, double window) {
    double worst = 0.0;
    if (s.time.empty()) return worst;
    const double end = s.time.back();
    for (std::size_t k = 0; k < s.time.size(); ++k)
      if (s.time[k] >= end - window - 1e-9) worst = std::max(worst, s.value[k]);
    return worst;
  };
  if (scenario == "containment") {
    out["max_follower_hull_distance_final_second"] = final_window(containment_series(t), 1.0);
  } else if (scenario == "formation") {
    const auto s = formation_series(t);
    out["final_formation_error"] = s.value.empty() ? 0.0 : s.value.back();
  } else if (scenario == "rendezvous") {
    const auto s = spread_series(t);
    out["final_spread"] = s.value.empty() ? 0.0 : s.value.back();
  } else if (scenario == "assignment") {
    double total = 0.0, gap = 0.0;
    int epochs = 0;
    for (const auto& r : t.records) {
      if (r.kind != RecordKind::Assignment) continue;
      ++epochs;
      total += r.payload.at("cost").get<double>();
      gap = std::max(gap, r.payload.at("cost").get<double>() - r.payload.at("optimal_cost").get<double>());
    }
    out["total_cost"] = total;
    out["max_optimality_gap"] = gap;
    out["completed_epochs"] = epochs;
    out["gantt_rows"] = gantt_rows(t).size();
  } else if (scenario == "mpc") {
    double worst = -std::numeric_limits<double>::infinity(), cost = 0.0;
    for (const auto& r : t.records) {
      if (r.kind != RecordKind::MpcResidual) continue;
      const auto& v = r.payload.at("coupling_residual");
      if (!v.is_null()) worst = std::max(worst, v.get<double>());
      cost += r.payload.at("stage_cost").get<double>();
    }
    out["max_coupling_residual"] = std::isfinite(worst) ? json(worst) : json();
    out["closed_loop_cost"] = cost;
  }
  return out;
}

std::vector<CsvTable> export_tables(const Trace& t) {
  std::vector<CsvTable> tables;
  if (t.header.is_null()) return tables;
  const std::string scenario = t.header.value("scenario", "");
  auto series_table = [&](const std::string& name, const std::string& column, const Series& s) {
    CsvTable tab{name, {"time", column}, {}};
    for (std::size_t k = 0; k < s.time.size(); ++k) tab.rows.push_back({fmt(s.time[k]), fmt(s.value[k])});
    tables.push_back(std::move(tab));
  };
  if (scenario == "containment") series_table("hull_distance", "max_follower_hull_distance", containment_series(t));
  if (scenario == "formation") series_table("formation_error", "formation_error", formation_series(t));
  if (scenario == "rendezvous") series_table("spread", "max_distance_to_centroid", spread_series(t));
  if (scenario == "mpc") series_table("coupling_residual", "coupling_residual", residual_series(t));
  if (scenario == "assignment") {
    CsvTable tab{"gantt", {"task", "start", "end", "robot", "reveal"}, {}};
    for (const auto& g : gantt_rows(t))
      tab.rows.push_back({std::to_string(g.task), fmt(g.assign), fmt(g.complete), std::to_string(g.robot), fmt(g.reveal)});
    tables.push_back(std::move(tab));
  }
  return tables;
}

std::vector<std::filesystem::path> export_csv(const Trace& t, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (const auto& tab : export_tables(t)) {
    const auto p = dir / (tab.name + ".csv");
    std::ofstream out(p);
    if (!out) throw TraceError("cannot write " + p.string());
    for (std::size_t c = 0; c < tab.columns.size(); ++c) out << (c ? "," : "") << tab.columns[c];
    out << '\n';
    for (const auto& row : tab.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
      out << '\n';
    }
    paths.push_back(p);
  }
  return paths;
}

}  // namespace robonet::sim
