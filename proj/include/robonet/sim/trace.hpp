#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace robonet::sim {

inline constexpr const char* kTraceSchema = "robonet.trace";
inline constexpr int kTraceVersion = 1;

enum class RecordKind { Pose, Input, Message, Assignment, TaskEvent, MpcResidual };
const char* to_string(RecordKind k);
RecordKind record_kind_from_string(const std::string& s);

struct TraceRecord {
  double time = 0.0;
  int agent = 0;
  RecordKind kind = RecordKind::Pose;
  nlohmann::json payload;
};

nlohmann::json to_json(const TraceRecord& r);

/// Line-delimited trace: a header object, then one record per line. All
/// writes go through one sink; callers serialise access.
class TraceWriter {
 public:
  /// Writes the header line {"schema", "version", "scenario", "config"}.
  TraceWriter(std::ostream& out, const std::string& scenario, const nlohmann::json& config);
  void write(const TraceRecord& r);
  std::size_t records() const { return count_; }

 private:
  std::ostream& out_;
  std::size_t count_ = 0;
};

struct Trace {
  nlohmann::json header;
  std::vector<TraceRecord> records;
};

/// Throws TraceError on a missing or mismatched header or a malformed line.
Trace read_trace(std::istream& in);
Trace read_trace(const std::filesystem::path& path);

/// Recomputes the run's summary metrics from its trace. An empty trace
/// (no header) yields an empty object.
nlohmann::json summarize(const Trace& trace);

struct CsvTable {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Plot-ready tables: per-metric time series and, for task runs, a Gantt
/// table (task, start, end, robot).
std::vector<CsvTable> export_tables(const Trace& trace);
/// Writes each table as <dir>/<name>.csv; returns the paths.
std::vector<std::filesystem::path> export_csv(const Trace& trace, const std::filesystem::path& dir);

}  // namespace robonet::sim
