#include "robonet/lockstep.hpp"

#include <exception>
#include <vector>

namespace robonet {

const char* to_string(Execution e) { return e == Execution::Serial ? "serial" : "parallel"; }

void for_each_agent(int n, Execution mode, const std::function<void(int)>& body) {
  if (mode == Execution::Serial) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n > 0 ? n : 0));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace robonet
