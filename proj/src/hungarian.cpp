#include <limits>

#include "robonet/error.hpp"
#include "robonet/lp.hpp"

namespace robonet::lp {

// Shortest augmenting paths with row/column potentials; rows are robots,
// columns tasks. Index 0 is a sentinel column.
HungarianResult hungarian(const AssignmentProblem& p) {
  const int n = p.n;
  if (n < 1) throw InvalidParameterError("assignment needs at least one robot");
  if (p.cost.rows() != n || p.cost.cols() != n) throw ShapeError("cost matrix must be n x n");

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = p.cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  HungarianResult out;
  out.assignment.assign(n, -1);
  for (int j = 1; j <= n; ++j) out.assignment[match[j] - 1] = j - 1;
  out.objective = assignment_cost(p.cost, out.assignment);
  return out;
}

}  // namespace robonet::lp
