#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "robonet/communicator.hpp"
#include "robonet/control.hpp"
#include "robonet/dynamics.hpp"
#include "robonet/guidance.hpp"
#include "robonet/lockstep.hpp"
#include "robonet/mpc.hpp"
#include "robonet/netgraph.hpp"
#include "robonet/runtime.hpp"

namespace robonet::sim {

inline constexpr int kConfigVersion = 1;

enum class ScenarioKind { Containment, Formation, Rendezvous, Assignment, Mpc };
const char* to_string(ScenarioKind k);
/// Throws ConfigError on an unknown name.
ScenarioKind scenario_from_string(std::string_view name);

struct CommSpec {
  CommProfile profile = CommProfile::Static;
  double activation_prob = 1.0;
  double drop_prob = 0.0;
  double latency = 0.0;
};

struct ContainmentBlock {
  std::vector<int> leaders;
  double gain = 1.0;
  std::vector<Eigen::Vector2d> positions;
};

struct FormationBlock {
  ModelKind model = ModelKind::SingleIntegrator;
  FormationSpec spec;
  /// Empty: hexagon vertices shuffled and perturbed from the seed.
  std::vector<Eigen::Vector2d> positions;
  double perturbation = 0.3;
  SiToUniParams mapping;
};

struct RendezvousBlock {
  std::vector<Eigen::Vector2d> positions;  // empty: drawn from the seed
};

struct AssignmentBlock {
  std::vector<UnicycleState> robots;
  std::vector<Eigen::Vector2d> tasks;
  int initial = 0;
  TrackerGains tracker;
};

struct MpcBlock {
  std::vector<OcpSpec> agents;
  int steps = 30;
};

struct ScenarioConfig {
  int version = kConfigVersion;
  ScenarioKind scenario = ScenarioKind::Containment;
  int n = 0;
  std::uint64_t seed = 0;
  double dt = 0.01;
  double duration = 30.0;
  CommGraph graph;
  CommSpec comm;
  Execution execution = Execution::Serial;
  /// Optional record kinds, off by default to keep traces small.
  bool trace_inputs = false;
  bool trace_messages = false;
  std::optional<ContainmentBlock> containment;
  std::optional<FormationBlock> formation;
  std::optional<RendezvousBlock> rendezvous;
  std::optional<AssignmentBlock> assignment;
  std::optional<MpcBlock> mpc;
  /// The normalised document, with defaults filled in.
  nlohmann::json document;
};

/// Parses and validates a JSON config. Throws ConfigError naming the path of
/// the offending field.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig parse_config(const nlohmann::json& doc);
inline ScenarioConfig parse_config(const std::string& text) { return parse_config(std::string_view(text)); }
inline ScenarioConfig parse_config(const char* text) { return parse_config(std::string_view(text)); }

/// Built-in config for a scenario, as a document (CLI runs without --config).
nlohmann::json default_document(ScenarioKind kind, int n, std::uint64_t seed);

/// Graph given as {"edges": [[i, j], ...], "undirected": bool},
/// {"matrix": [[0, 1, ...], ...]} or {"erdos_renyi": {"p": p, "seed": s}}.
CommGraph graph_from_json(const nlohmann::json& j, int n, const std::string& path);

}  // namespace robonet::sim
