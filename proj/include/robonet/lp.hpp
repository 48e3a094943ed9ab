#pragma once

#include <Eigen/Dense>
#include <vector>

namespace robonet::lp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// min c'x  s.t.  A x = b, x >= 0
struct StandardLP {
  Matrix A;
  Vector b;
  Vector c;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };
const char* to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double objective = 0.0;
  /// Basic column per kept constraint row.
  std::vector<int> basis;
  /// Rows of A that survived redundancy elimination (basis[k] belongs to
  /// kept_rows[k]).
  std::vector<int> kept_rows;
  /// Simplex multipliers y = c_B' B^-1 over all rows (dropped rows get 0).
  Vector duals;
  int iterations = 0;
};

struct SimplexOptions {
  double tol = 1e-9;
  /// Consecutive degenerate pivots tolerated under Dantzig pricing before
  /// switching to Bland's rule for the rest of the solve.
  int bland_after = 50;
  int max_iterations = 200000;
  /// Exact lexicographic mode: ratio test on [B^-1 b | B^-1] and reduced
  /// costs compared as if c_j carried an infinitesimal eps^rank(j). Yields
  /// the unique lexicographically optimal basis.
  bool lexicographic = false;
  /// Per-column priority for the infinitesimal cost perturbation (lower rank
  /// = larger perturbation). Empty means rank = column index.
  std::vector<long> column_rank;
};

LpSolution solve_lp(const StandardLP& p, const SimplexOptions& opts = {});

struct BasisRun {
  LpStatus status = LpStatus::Optimal;  // Optimal or Unbounded
  std::vector<int> basis;
  int iterations = 0;
};

/// Phase-2 simplex from a primal feasible basis (one column per row of A).
/// Deterministic: ties always go to the lowest column index.
BasisRun optimize_from_basis(const Matrix& A, const Vector& b, const Vector& c,
                             std::vector<int> basis, const SimplexOptions& opts);

/// Same, with a lexicographic objective: cost_tiers[0] dominates, then
/// cost_tiers[1], and so on. A tier of indicator costs on artificial
/// columns gives an exact "infinitely large M".
BasisRun optimize_from_basis(const Matrix& A, const Vector& b, std::vector<Vector> cost_tiers,
                             std::vector<int> basis, const SimplexOptions& opts);

/// x_B = B^-1 b for the given basis, scattered into a full-length vector.
Vector basic_solution(const Matrix& A, const Vector& b, const std::vector<int>& basis);

// ---------------------------------------------------------------------------
// Assignment problems

struct AssignmentProblem {
  int n = 0;
  Matrix cost;  // cost(i, k): robot i serving task k
};

inline int assignment_var(int n, int robot, int task) { return robot * n + task; }

/// Variables x_ik (index i*n + k). Rows: one per robot, then one per task
/// except the last task (that row is implied by the others).
StandardLP build_assignment_lp(const AssignmentProblem& p);

/// Reads a 0/1 vertex back into robot -> task.
std::vector<int> permutation_from_solution(int n, const Vector& x);

/// sum_i cost(i, perm[i]), accumulated in robot order.
double assignment_cost(const Matrix& cost, const std::vector<int>& perm);

struct HungarianResult {
  std::vector<int> assignment;  // robot -> task
  double objective = 0.0;
};

/// O(n^3) shortest-augmenting-path Hungarian method.
HungarianResult hungarian(const AssignmentProblem& p);

struct PerturbationSchedule {
  double epsilon = 1e-7;
  double ratio = 0.5;
};

/// c_j += epsilon * ratio^j. epsilon = 0 leaves the problem unchanged.
StandardLP lex_perturb(const StandardLP& p, const PerturbationSchedule& schedule = {});

}  // namespace robonet::lp

namespace robonet::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };

/// General-form LP assembled row by row and lowered to StandardLP: free
/// variables are split into a difference of two non-negative parts and
/// inequality rows get a slack column.
class LpBuilder {
 public:
  using Term = std::pair<int, double>;

  /// Returns the index of the new variable.
  int add_variable(double cost, bool free);
  void add_row(const std::vector<Term>& terms, Sense sense, double rhs);
  void add_constant(double c) { constant_ += c; }

  int variables() const { return static_cast<int>(cost_.size()); }
  int rows() const { return static_cast<int>(rhs_.size()); }
  double constant() const { return constant_; }

  StandardLP build() const;
  /// Values of the original variables from a standard-form solution.
  Vector recover(const Vector& standard_x) const;

 private:
  struct Row {
    std::vector<Term> terms;
    Sense sense;
  };
  std::vector<double> cost_;
  std::vector<bool> free_;
  std::vector<Row> rows_;
  std::vector<double> rhs_;
  double constant_ = 0.0;
};

}  // namespace robonet::lp
