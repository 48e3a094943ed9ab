#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "robonet/error.hpp"
#include "robonet/sim/config.hpp"
#include "robonet/sim/scenarios.hpp"
#include "robonet/sim/trace.hpp"

namespace {

using nlohmann::json;
namespace sim = robonet::sim;

constexpr int kConfigExit = 2;
constexpr int kScenarioExit = 3;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw robonet::ConfigError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw robonet::ConfigError(path + ": " + e.what());
  }
}

struct RunArgs {
  std::string scenario;
  std::string config;
  int n = 0;
  long long seed = -1;
  double dt = 0.0;
  double duration = -1.0;
  std::string graph;
  std::string out = "out";
  bool parallel = false;
};

json build_document(const RunArgs& a) {
  json doc = a.config.empty() ? json{{"scenario", a.scenario}} : load_json(a.config);
  if (!doc.is_object()) throw robonet::ConfigError("document: expected an object");
  if (doc.contains("scenario") && doc["scenario"] != a.scenario)
    throw robonet::ConfigError("scenario: config describes " + doc["scenario"].dump() + ", not '" + a.scenario + "'");
  doc["scenario"] = a.scenario;
  if (a.n > 0) doc["n"] = a.n;
  if (a.seed >= 0) doc["seed"] = a.seed;
  if (a.dt > 0.0) doc["dt"] = a.dt;
  if (a.duration >= 0.0) doc["duration"] = a.duration;
  if (a.parallel) doc["execution"] = "parallel";
  if (!a.graph.empty()) {
    if (a.graph.rfind("er:", 0) == 0) {
      double p = 0.0;
      try {
        p = std::stod(a.graph.substr(3));
      } catch (const std::exception&) {
        throw robonet::ConfigError("graph: cannot read probability from '" + a.graph + "'");
      }
      doc["graph"] = {{"erdos_renyi", {{"p", p}, {"seed", a.seed >= 0 ? a.seed : 0}, {"connected", true}}}};
    } else {
      doc["graph"] = load_json(a.graph);
    }
  }
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot coordination simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write trace.jsonl and summary.json");
  run_cmd->add_option("scenario", run.scenario, "containment | formation | rendezvous | assignment | mpc")->required();
  run_cmd->add_option("-n", run.n, "Agent count");
  run_cmd->add_option("--seed", run.seed, "Random seed");
  run_cmd->add_option("--dt", run.dt, "Time step in seconds");
  run_cmd->add_option("--duration", run.duration, "Simulated seconds");
  run_cmd->add_option("--graph", run.graph, "Graph file (JSON) or er:<p>");
  run_cmd->add_option("--config", run.config, "Scenario config file (JSON)");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_flag("--parallel", run.parallel, "Run agent phases on OpenMP threads");

  std::string trace_path, out_path;
  auto* sum_cmd = app.add_subcommand("summarize", "Recompute summary metrics from a trace");
  sum_cmd->add_option("trace", trace_path, "trace.jsonl")->required();

  auto* csv_cmd = app.add_subcommand("export-csv", "Write plot-ready CSV tables from a trace");
  csv_cmd->add_option("trace", trace_path, "trace.jsonl")->required();
  csv_cmd->add_option("--out", out_path, "Output directory")->required();

  RunArgs batch;
  std::vector<long long> seeds;
  auto* batch_cmd = app.add_subcommand("batch", "Run one scenario over several seeds, one summary per line");
  batch_cmd->add_option("scenario", batch.scenario, "Scenario name")->required();
  batch_cmd->add_option("--seeds", seeds, "Seeds")->required();
  batch_cmd->add_option("-n", batch.n, "Agent count");
  batch_cmd->add_option("--config", batch.config, "Scenario config file (JSON)");
  batch_cmd->add_flag("--parallel", batch.parallel, "Spread trials over OpenMP threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (*run_cmd) {
      const auto cfg = sim::parse_config(build_document(run));
      const auto summary = sim::run_scenario(cfg, std::filesystem::path(run.out));
      std::cout << summary.dump(2) << '\n';
    } else if (*sum_cmd) {
      std::cout << sim::summarize(sim::read_trace(std::filesystem::path(trace_path))).dump(2) << '\n';
    } else if (*csv_cmd) {
      for (const auto& p : sim::export_csv(sim::read_trace(std::filesystem::path(trace_path)), out_path))
        std::cout << p.string() << '\n';
    } else if (*batch_cmd) {
      const bool parallel = batch.parallel;
      batch.parallel = false;
      const json doc = build_document(batch);
      sim::parse_config(doc);
      std::vector<std::uint64_t> s(seeds.begin(), seeds.end());
      for (const auto& summary :
           sim::run_batch(doc, s, parallel ? robonet::Execution::Parallel : robonet::Execution::Serial))
        std::cout << summary.dump() << '\n';
    }
  } catch (const robonet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "scenario failure: " << e.what() << '\n';
    return kScenarioExit;
  }
  return EXIT_SUCCESS;
}
