#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "json.hpp"
#include "robonet/runtime.hpp"
#include "robonet/sim/config.hpp"

namespace robonet::sim {

/// Initial agent specs for the guidance scenarios (containment, formation,
/// rendezvous), including positions drawn from the seed when not given.
std::vector<AgentSpec> guidance_agents(const ScenarioConfig& cfg);

/// Runs the scenario in lockstep and streams its trace to `trace_out`.
/// Returns the summary metrics. On failure the partial trace is flushed
/// before the error propagates.
nlohmann::json run_scenario(const ScenarioConfig& cfg, std::ostream& trace_out);

/// Writes <out_dir>/trace.jsonl and <out_dir>/summary.json, plus
/// <out_dir>/gantt.csv for task runs.
nlohmann::json run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

/// Runs the document once per seed (the "seed" field is overridden) and
/// returns the summaries in seed order. Trials run serially or spread over
/// OpenMP threads; each trial itself runs serially.
std::vector<nlohmann::json> run_batch(const nlohmann::json& document, const std::vector<std::uint64_t>& seeds,
                                      Execution execution);

}  // namespace robonet::sim
