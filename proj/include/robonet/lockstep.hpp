#pragma once

#include <functional>

namespace robonet {

/// How the per-agent phases of a lockstep tick are executed.
enum class Execution { Serial, Parallel };

const char* to_string(Execution e);

/// Runs body(i) for every i in [0, n). Serial runs in index order and is the
/// reference; Parallel spreads the indices over OpenMP threads. If bodies
/// throw, the exception of the lowest index is rethrown after all finish.
void for_each_agent(int n, Execution mode, const std::function<void(int)>& body);

}  // namespace robonet
