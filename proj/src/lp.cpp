#include "robonet/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "robonet/error.hpp"

namespace robonet::lp {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
  }
  return "?";
}

namespace {

constexpr int kRefactorEvery = 64;

class Simplex {
 public:
  Simplex(const Matrix& A, const Vector& b, std::vector<Vector> tiers, std::vector<int> basis,
          const SimplexOptions& opts, std::vector<bool> enterable)
      : A_(A), b_(b), tiers_(std::move(tiers)), basis_(std::move(basis)), opts_(opts),
        enterable_(std::move(enterable)) {
    if (tiers_.empty()) throw ShapeError("at least one cost vector is required");
    for (const auto& t : tiers_)
      if (t.size() != A_.cols()) throw ShapeError("cost vector length must equal column count");
    m_ = static_cast<int>(A_.rows());
    n_ = static_cast<int>(A_.cols());
    if (static_cast<int>(basis_.size()) != m_) throw ShapeError("basis size must equal row count");
    in_basis_.assign(n_, false);
    for (int j : basis_) {
      if (j < 0 || j >= n_) throw ShapeError("basis column out of range");
      if (in_basis_[j]) throw ShapeError("duplicate basis column");
      in_basis_[j] = true;
    }
    if (enterable_.empty()) enterable_.assign(n_, true);
    refactor();
  }

  LpStatus run() {
    int stalled = 0;
    bool bland = false;
    int since_refactor = 0;
    while (true) {
      if (iterations_ >= opts_.max_iterations)
        throw NumericError("simplex iteration limit reached");
      const Vector xB = Binv_ * b_;
      std::vector<Eigen::RowVectorXd> y;
      for (const auto& t : tiers_) {
        Vector cB(m_);
        for (int r = 0; r < m_; ++r) cB[r] = t[basis_[r]];
        y.push_back(cB.transpose() * Binv_);
      }

      const int enter = choose_entering(y, bland);
      if (enter < 0) return LpStatus::Optimal;

      const Vector w = Binv_ * A_.col(enter);
      const int leave = choose_leaving(xB, w);
      if (leave < 0) return LpStatus::Unbounded;

      const double step = xB[leave] / w[leave];
      if (step <= opts_.tol) {
        if (++stalled >= opts_.bland_after) bland = true;
      } else {
        stalled = 0;
      }

      pivot(leave, enter, w);
      ++iterations_;
      if (++since_refactor >= kRefactorEvery) {
        refactor();
        since_refactor = 0;
      }
    }
  }

  const std::vector<int>& basis() const { return basis_; }
  const Matrix& binv() const { return Binv_; }
  int iterations() const { return iterations_; }

 private:
  void refactor() {
    Matrix B(m_, m_);
    for (int r = 0; r < m_; ++r) B.col(r) = A_.col(basis_[r]);
    Eigen::FullPivLU<Matrix> lu(B);
    if (!lu.isInvertible()) throw NumericError("singular basis matrix");
    Binv_ = lu.inverse();
  }

  long rank_of(int j) const {
    return opts_.column_rank.empty() ? j : opts_.column_rank[j];
  }

  // Sign of the infinitesimal part of the reduced cost of nonbasic column j:
  // eps^rank(j) - sum_r eps^rank(basis[r]) * (B^-1 a_j)_r.
  int lex_reduced_sign(int j) const {
    const Vector w = Binv_ * A_.col(j);
    long best = rank_of(j);
    double coef = 1.0;
    for (int r = 0; r < m_; ++r) {
      if (std::abs(w[r]) <= opts_.tol) continue;
      long rk = rank_of(basis_[r]);
      if (rk < best) {
        best = rk;
        coef = -w[r];
      }
    }
    return coef < 0 ? -1 : 1;
  }

  // Reduced costs are compared tier by tier; within the first tier that is
  // not (numerically) zero the sign decides. Returns (tier, value); tier -1
  // means all tiers vanish.
  std::pair<int, double> reduced_cost(const std::vector<Eigen::RowVectorXd>& y, int j) const {
    for (std::size_t t = 0; t < tiers_.size(); ++t) {
      const double d = tiers_[t][j] - y[t].dot(A_.col(j));
      if (std::abs(d) > opts_.tol) return {static_cast<int>(t), d};
    }
    return {-1, 0.0};
  }

  int choose_entering(const std::vector<Eigen::RowVectorXd>& y, bool bland) const {
    int best = -1;
    int best_tier = std::numeric_limits<int>::max();
    double best_d = 0.0;
    int first_lex = -1;
    for (int j = 0; j < n_; ++j) {
      if (in_basis_[j] || !enterable_[j]) continue;
      const auto [tier, d] = reduced_cost(y, j);
      if (tier >= 0) {
        if (d >= 0) continue;
        if (bland) return j;
        if (tier < best_tier || (tier == best_tier && d < best_d)) {
          best_tier = tier;
          best_d = d;
          best = j;
        }
      } else if (opts_.lexicographic && first_lex < 0 && lex_reduced_sign(j) < 0) {
        if (bland) return j;
        first_lex = j;
      }
    }
    return best >= 0 ? best : first_lex;
  }

  // Compares rows r1, r2 of [x_B | B^-1] scaled by 1/w; true if r1 is smaller.
  bool lex_less(int r1, int r2, const Vector& xB, const Vector& w) const {
    auto cmp = [&](double a, double b) {
      const double scale = std::max({1.0, std::abs(a), std::abs(b)});
      if (a < b - opts_.tol * scale) return -1;
      if (a > b + opts_.tol * scale) return 1;
      return 0;
    };
    int s = cmp(xB[r1] / w[r1], xB[r2] / w[r2]);
    if (s != 0) return s < 0;
    for (int k = 0; k < m_; ++k) {
      s = cmp(Binv_(r1, k) / w[r1], Binv_(r2, k) / w[r2]);
      if (s != 0) return s < 0;
    }
    return basis_[r1] < basis_[r2];
  }

  int choose_leaving(const Vector& xB, const Vector& w) const {
    int best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m_; ++r) {
      if (w[r] <= opts_.tol) continue;
      if (best < 0) {
        best = r;
        best_ratio = std::max(xB[r], 0.0) / w[r];
        continue;
      }
      if (opts_.lexicographic) {
        if (lex_less(r, best, xB, w)) best = r;
        continue;
      }
      const double ratio = std::max(xB[r], 0.0) / w[r];
      const double slack = opts_.tol * std::max(1.0, std::abs(best_ratio));
      if (ratio < best_ratio - slack ||
          (ratio <= best_ratio + slack && basis_[r] < basis_[best])) {
        best = r;
        best_ratio = std::min(ratio, best_ratio);
      }
    }
    return best;
  }

  void pivot(int leave, int enter, const Vector& w) {
    const double p = w[leave];
    Binv_.row(leave) /= p;
    for (int r = 0; r < m_; ++r) {
      if (r == leave || w[r] == 0.0) continue;
      Binv_.row(r) -= w[r] * Binv_.row(leave);
    }
    in_basis_[basis_[leave]] = false;
    basis_[leave] = enter;
    in_basis_[enter] = true;
  }

  const Matrix& A_;
  const Vector& b_;
  std::vector<Vector> tiers_;
  std::vector<int> basis_;
  SimplexOptions opts_;
  std::vector<bool> enterable_;
  std::vector<bool> in_basis_;
  Matrix Binv_;
  int m_ = 0;
  int n_ = 0;
  int iterations_ = 0;
};

void check_shapes(const StandardLP& p) {
  if (p.b.size() != p.A.rows() || p.c.size() != p.A.cols())
    throw ShapeError("LP dimensions are inconsistent: A is " + std::to_string(p.A.rows()) + "x" +
                     std::to_string(p.A.cols()) + ", b has " + std::to_string(p.b.size()) +
                     ", c has " + std::to_string(p.c.size()));
  if (!p.A.allFinite() || !p.b.allFinite() || !p.c.allFinite())
    throw NumericError("LP data must be finite");
}

}  // namespace

BasisRun optimize_from_basis(const Matrix& A, const Vector& b, const Vector& c,
                             std::vector<int> basis, const SimplexOptions& opts) {
  return optimize_from_basis(A, b, std::vector<Vector>{c}, std::move(basis), opts);
}

BasisRun optimize_from_basis(const Matrix& A, const Vector& b, std::vector<Vector> cost_tiers,
                             std::vector<int> basis, const SimplexOptions& opts) {
  if (b.size() != A.rows()) throw ShapeError("LP dimensions are inconsistent");
  Simplex s(A, b, std::move(cost_tiers), std::move(basis), opts, {});
  BasisRun out;
  out.status = s.run();
  out.basis = s.basis();
  out.iterations = s.iterations();
  return out;
}

Vector basic_solution(const Matrix& A, const Vector& b, const std::vector<int>& basis) {
  const int m = static_cast<int>(basis.size());
  Matrix B(A.rows(), m);
  for (int r = 0; r < m; ++r) B.col(r) = A.col(basis[r]);
  Vector xB = B.fullPivLu().solve(b);
  Vector x = Vector::Zero(A.cols());
  for (int r = 0; r < m; ++r) x[basis[r]] = xB[r];
  return x;
}

LpSolution solve_lp(const StandardLP& p, const SimplexOptions& opts) {
  check_shapes(p);
  const int m = static_cast<int>(p.A.rows());
  const int n = static_cast<int>(p.A.cols());

  LpSolution sol;
  sol.duals = Vector::Zero(m);

  if (m == 0) {
    sol.x = Vector::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (p.c[j] < -opts.tol) {
        sol.status = LpStatus::Unbounded;
        return sol;
      }
    }
    sol.status = LpStatus::Optimal;
    return sol;
  }

  // Phase 1 on [A | I] with b >= 0.
  Matrix A1(m, n + m);
  Vector b1 = p.b;
  A1.leftCols(n) = p.A;
  A1.rightCols(m).setIdentity();
  for (int r = 0; r < m; ++r) {
    if (b1[r] < 0) {
      b1[r] = -b1[r];
      A1.row(r).head(n) *= -1.0;
    }
  }
  Vector c1 = Vector::Zero(n + m);
  c1.tail(m).setOnes();
  std::vector<int> basis(m);
  for (int r = 0; r < m; ++r) basis[r] = n + r;

  SimplexOptions phase1_opts = opts;
  phase1_opts.column_rank.clear();
  Simplex phase1(A1, b1, {c1}, basis, phase1_opts, {});
  phase1.run();
  sol.iterations = phase1.iterations();
  basis = phase1.basis();

  const Vector x1 = basic_solution(A1, b1, basis);
  const double infeas = x1.tail(m).sum();
  const double feas_tol = 1e-9 * std::max(1.0, b1.lpNorm<Eigen::Infinity>());
  if (infeas > feas_tol) {
    sol.status = LpStatus::Infeasible;
    sol.x = x1.head(n);
    return sol;
  }

  // Drive zero-level artificials out; rows where that is impossible are
  // linearly dependent on the others and get dropped.
  std::vector<bool> keep(m, true);
  {
    std::vector<bool> basic(n + m, false);
    for (int j : basis) basic[j] = true;
    Matrix B(m, m);
    for (int r = 0; r < m; ++r) B.col(r) = A1.col(basis[r]);
    Matrix Binv = B.fullPivLu().inverse();
    for (int r = 0; r < m; ++r) {
      if (basis[r] < n) continue;
      const Eigen::RowVectorXd row = Binv.row(r) * A1.leftCols(n);
      int best = -1;
      double best_abs = 1e-9;
      for (int j = 0; j < n; ++j) {
        if (basic[j]) continue;
        if (std::abs(row[j]) > best_abs) {
          best_abs = std::abs(row[j]);
          best = j;
        }
      }
      if (best < 0) {
        keep[r] = false;
        continue;
      }
      const Vector w = Binv * A1.col(best);
      Binv.row(r) /= w[r];
      for (int i = 0; i < m; ++i)
        if (i != r) Binv.row(i) -= w[i] * Binv.row(r);
      basic[basis[r]] = false;
      basis[r] = best;
      basic[best] = true;
    }
  }

  std::vector<int> rows;
  std::vector<int> basis2;
  for (int r = 0; r < m; ++r) {
    if (!keep[r]) continue;
    rows.push_back(r);
    basis2.push_back(basis[r]);
  }
  const int m2 = static_cast<int>(rows.size());
  Matrix A2(m2, n);
  Vector b2(m2);
  for (int k = 0; k < m2; ++k) {
    A2.row(k) = A1.row(rows[k]).head(n);
    b2[k] = b1[rows[k]];
  }

  Simplex phase2(A2, b2, {p.c}, basis2, opts, {});
  const LpStatus status = phase2.run();
  sol.iterations += phase2.iterations();
  sol.basis = phase2.basis();
  sol.kept_rows = rows;
  sol.status = status;
  if (status != LpStatus::Optimal) {
    sol.x = basic_solution(A2, b2, sol.basis);
    return sol;
  }

  sol.x = basic_solution(A2, b2, sol.basis);
  for (int j = 0; j < n; ++j)
    if (sol.x[j] < 0 && sol.x[j] > -1e-11) sol.x[j] = 0.0;
  sol.objective = p.c.dot(sol.x);

  Vector cB(m2);
  for (int k = 0; k < m2; ++k) cB[k] = p.c[sol.basis[k]];
  Matrix B(m2, m2);
  for (int k = 0; k < m2; ++k) B.col(k) = A2.col(sol.basis[k]);
  const Vector y2 = B.transpose().fullPivLu().solve(cB);
  for (int k = 0; k < m2; ++k) {
    // Undo the row flip applied for phase 1.
    const int r = rows[k];
    sol.duals[r] = p.b[r] < 0 ? -y2[k] : y2[k];
  }
  return sol;
}

StandardLP build_assignment_lp(const AssignmentProblem& p) {
  const int n = p.n;
  if (n < 1) throw InvalidParameterError("assignment needs at least one robot");
  if (p.cost.rows() != n || p.cost.cols() != n) throw ShapeError("cost matrix must be n x n");
  if (!p.cost.allFinite()) throw NumericError("assignment costs must be finite");
  StandardLP lp;
  const int m = 2 * n - 1;
  lp.A = Matrix::Zero(m, n * n);
  lp.b = Vector::Ones(m);
  lp.c = Vector(n * n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const int j = assignment_var(n, i, k);
      lp.A(i, j) = 1.0;
      if (k < n - 1) lp.A(n + k, j) = 1.0;
      lp.c[j] = p.cost(i, k);
    }
  }
  return lp;
}

std::vector<int> permutation_from_solution(int n, const Vector& x) {
  std::vector<int> perm(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (x[assignment_var(n, i, k)] > 0.5) {
        if (perm[i] >= 0) throw NumericError("solution is not a permutation");
        perm[i] = k;
      }
    }
    if (perm[i] < 0) throw NumericError("solution is not a permutation");
  }
  return perm;
}

double assignment_cost(const Matrix& cost, const std::vector<int>& perm) {
  double total = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) total += cost(static_cast<Eigen::Index>(i), perm[i]);
  return total;
}

StandardLP lex_perturb(const StandardLP& p, const PerturbationSchedule& schedule) {
  StandardLP out = p;
  if (schedule.epsilon == 0.0) return out;
  double delta = schedule.epsilon;
  for (Eigen::Index j = 0; j < out.c.size(); ++j) {
    out.c[j] += delta;
    delta *= schedule.ratio;
  }
  return out;
}

}  // namespace robonet::lp

namespace robonet::lp {

int LpBuilder::add_variable(double cost, bool free) {
  if (!std::isfinite(cost)) throw NumericError("variable cost must be finite");
  cost_.push_back(cost);
  free_.push_back(free);
  return static_cast<int>(cost_.size()) - 1;
}

void LpBuilder::add_row(const std::vector<Term>& terms, Sense sense, double rhs) {
  for (const auto& [j, a] : terms) {
    if (j < 0 || j >= variables()) throw ShapeError("row references an unknown variable");
    if (!std::isfinite(a)) throw NumericError("row coefficient must be finite");
  }
  if (!std::isfinite(rhs)) throw NumericError("row bound must be finite");
  rows_.push_back({terms, sense});
  rhs_.push_back(rhs);
}

StandardLP LpBuilder::build() const {
  std::vector<int> pos(cost_.size()), neg(cost_.size(), -1);
  int cols = 0;
  for (std::size_t j = 0; j < cost_.size(); ++j) {
    pos[j] = cols++;
    if (free_[j]) neg[j] = cols++;
  }
  std::vector<int> slack(rows_.size(), -1);
  for (std::size_t r = 0; r < rows_.size(); ++r)
    if (rows_[r].sense != Sense::Equal) slack[r] = cols++;

  StandardLP p;
  p.A = Matrix::Zero(static_cast<Eigen::Index>(rows_.size()), cols);
  p.b = Eigen::Map<const Vector>(rhs_.data(), static_cast<Eigen::Index>(rhs_.size()));
  p.c = Vector::Zero(cols);
  for (std::size_t j = 0; j < cost_.size(); ++j) {
    p.c[pos[j]] = cost_[j];
    if (neg[j] >= 0) p.c[neg[j]] = -cost_[j];
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    for (const auto& [j, a] : rows_[r].terms) {
      p.A(i, pos[j]) += a;
      if (neg[j] >= 0) p.A(i, neg[j]) -= a;
    }
    if (rows_[r].sense == Sense::LessEqual) p.A(i, slack[r]) = 1.0;
    if (rows_[r].sense == Sense::GreaterEqual) p.A(i, slack[r]) = -1.0;
  }
  return p;
}

Vector LpBuilder::recover(const Vector& standard_x) const {
  Vector x(variables());
  int col = 0;
  for (std::size_t j = 0; j < cost_.size(); ++j) {
    x[static_cast<Eigen::Index>(j)] = standard_x[col++];
    if (free_[j]) x[static_cast<Eigen::Index>(j)] -= standard_x[col++];
  }
  return x;
}

}  // namespace robonet::lp
