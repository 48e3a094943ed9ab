#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "robonet/error.hpp"
#include "robonet/lp.hpp"

using namespace robonet;
using namespace robonet::lp;

namespace {

StandardLP make(Matrix A, Vector b, Vector c) { return {std::move(A), std::move(b), std::move(c)}; }

AssignmentProblem problem(const Matrix& c) { return {static_cast<int>(c.rows()), c}; }

double dual_objective(const StandardLP& p, const LpSolution& s) { return p.b.dot(s.duals); }

}  // namespace

TEST(SolveLp, TinyExamples) {
  auto s = solve_lp(make((Matrix(1, 2) << 1, 1).finished(), Vector::Ones(1), (Vector(2) << 1, 0).finished()));
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_NEAR(s.x(0), 0.0, 1e-12);
  EXPECT_NEAR(s.x(1), 1.0, 1e-12);
  EXPECT_NEAR(s.objective, 0.0, 1e-12);

  auto inf = solve_lp(make(Matrix::Ones(1, 1), -Vector::Ones(1), Vector::Ones(1)));
  EXPECT_EQ(inf.status, LpStatus::Infeasible);

  auto unb = solve_lp(make((Matrix(1, 2) << 1, -1).finished(), Vector::Zero(1), (Vector(2) << -1, 0).finished()));
  EXPECT_EQ(unb.status, LpStatus::Unbounded);
}

TEST(SolveLp, ShapeErrors) {
  EXPECT_THROW(solve_lp(make(Matrix::Ones(2, 3), Vector::Ones(3), Vector::Ones(3))), ShapeError);
  EXPECT_THROW(solve_lp(make(Matrix::Ones(2, 3), Vector::Ones(2), Vector::Ones(2))), ShapeError);
}

TEST(SolveLp, RedundantRowsHandled) {
  Matrix A(3, 3);
  A << 1, 1, 0, 0, 1, 1, 1, 2, 1;  // row 3 = row 1 + row 2
  Vector b(3);
  b << 1, 1, 2;
  Vector c(3);
  c << 1, 3, 1;
  auto s = solve_lp(make(A, b, c));
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_EQ(s.kept_rows.size(), 2u);
  EXPECT_NEAR(s.objective, 2.0, 1e-12);
  EXPECT_LE((A * s.x - b).norm(), 1e-9);
}

TEST(SolveLp, MatchesVertexEnumeration) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> d(-1, 1), pos(0.1, 1);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 2), n = m + 2 + static_cast<int>(rng() % 2);
    Matrix A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = d(rng);
    Vector x0(n);
    for (int j = 0; j < n; ++j) x0(j) = pos(rng);
    Vector b = A * x0;  // feasible by construction
    Vector c(n);
    for (int j = 0; j < n; ++j) c(j) = pos(rng);  // c > 0 keeps it bounded
    auto s = solve_lp(make(A, b, c));
    ASSERT_EQ(s.status, LpStatus::Optimal);
    const double ref = oracle::vertex_enumeration_lp(A, b, c);
    EXPECT_NEAR(s.objective, ref, 1e-8 * std::max(1.0, std::abs(ref)));
    EXPECT_LE((A * s.x - b).norm(), 1e-9);
    EXPECT_GE(s.x.minCoeff(), -1e-12);
    ++checked;
  }
  EXPECT_EQ(checked, 200);
}

TEST(AssignmentLp, Structure) {
  Matrix c(3, 3);
  c.setRandom();
  auto lp = build_assignment_lp(problem(c));
  EXPECT_EQ(lp.A.rows(), 5);
  EXPECT_EQ(lp.A.cols(), 9);
  Eigen::FullPivLU<Matrix> lu(lp.A);
  EXPECT_EQ(lu.rank(), 5);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      const auto col = lp.A.col(assignment_var(3, i, k));
      EXPECT_EQ(col(i), 1.0);
      EXPECT_EQ(col.sum(), k < 2 ? 2.0 : 1.0);
      if (k < 2) EXPECT_EQ(col(3 + k), 1.0);
      EXPECT_EQ(lp.c(assignment_var(3, i, k)), c(i, k));
    }
}

TEST(AssignmentLp, SmallExamples) {
  auto one = solve_lp(build_assignment_lp(problem(Matrix::Constant(1, 1, 4.0))));
  ASSERT_EQ(one.status, LpStatus::Optimal);
  EXPECT_NEAR(one.x(0), 1.0, 1e-12);

  Matrix c(2, 2);
  c << 1, 2, 2, 1;
  auto s = solve_lp(build_assignment_lp(problem(c)));
  EXPECT_NEAR(s.objective, 2.0, 1e-12);
  EXPECT_EQ(permutation_from_solution(2, s.x), (std::vector<int>{0, 1}));

  auto tie = solve_lp(build_assignment_lp(problem(Matrix::Ones(2, 2))));
  EXPECT_NEAR(tie.objective, 2.0, 1e-12);
  auto perm = permutation_from_solution(2, tie.x);
  EXPECT_TRUE(perm == (std::vector<int>{0, 1}) || perm == (std::vector<int>{1, 0}));
}

TEST(AssignmentLp, RandomAgainstHungarianWithCertificates) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + trial % 4;
    Matrix c = oracle::random_costs(n, rng);
    auto lp = build_assignment_lp(problem(c));
    auto s = solve_lp(lp);
    ASSERT_EQ(s.status, LpStatus::Optimal);
    for (Eigen::Index j = 0; j < s.x.size(); ++j)
      EXPECT_LE(std::min(std::abs(s.x(j)), std::abs(s.x(j) - 1.0)), 1e-9);
    EXPECT_NEAR(dual_objective(lp, s), s.objective, 1e-8);
    const auto perm = permutation_from_solution(n, s.x);
    const auto h = hungarian(problem(c));
    EXPECT_EQ(assignment_cost(c, perm), assignment_cost(c, h.assignment)) << "trial " << trial;
  }
}

TEST(SolveLp, ReducedCostsNonNegativeAtOptimum) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto lp = build_assignment_lp(problem(oracle::random_costs(4, rng)));
    auto s = solve_lp(lp);
    Vector reduced = lp.c - lp.A.transpose() * s.duals;
    EXPECT_GE(reduced.minCoeff(), -1e-9);
    for (int j : s.basis) EXPECT_NEAR(reduced(j), 0.0, 1e-9);
  }
}

TEST(SolveLp, DeterministicBasis) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto lp = build_assignment_lp(problem(oracle::random_costs(5, rng)));
    EXPECT_EQ(solve_lp(lp).basis, solve_lp(lp).basis);
  }
}

TEST(SolveLp, DegenerateAllTiesTerminates) {
  for (int n = 2; n <= 8; ++n) {
    auto s = solve_lp(build_assignment_lp(problem(Matrix::Ones(n, n))));
    ASSERT_EQ(s.status, LpStatus::Optimal);
    EXPECT_NEAR(s.objective, n, 1e-9);
    SimplexOptions bland;
    bland.bland_after = 0;
    EXPECT_NEAR(solve_lp(build_assignment_lp(problem(Matrix::Ones(n, n))), bland).objective, n, 1e-9);
  }
}

TEST(SolveLp, LexicographicModeGivesUniqueBasis) {
  // All costs tied: column j carries eps^j, so weight is pushed away from
  // low indices first. Robot 0 avoids tasks 0 and 1, then robot 1 avoids 0.
  SimplexOptions lex;
  lex.lexicographic = true;
  auto s = solve_lp(build_assignment_lp(problem(Matrix::Ones(3, 3))), lex);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  EXPECT_EQ(permutation_from_solution(3, s.x), (std::vector<int>{2, 1, 0}));
  auto again = solve_lp(build_assignment_lp(problem(Matrix::Ones(3, 3))), lex);
  EXPECT_EQ(again.basis, s.basis);
}

TEST(Hungarian, Examples) {
  Matrix id = Matrix::Ones(4, 4) - Matrix::Identity(4, 4);
  auto h = hungarian(problem(id));
  EXPECT_EQ(h.assignment, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(h.objective, 0.0);
  Matrix c(2, 2);
  c << 1, 2, 2, 1;
  h = hungarian(problem(c));
  EXPECT_EQ(h.assignment, (std::vector<int>{0, 1}));
  EXPECT_EQ(h.objective, 2.0);
}

TEST(Hungarian, MatchesBruteForce) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix c = oracle::random_costs(6, rng);
    auto h = hungarian(problem(c));
    auto bf = oracle::brute_force_assignment(c);
    EXPECT_NEAR(h.objective, bf.cost, 1e-12);
    EXPECT_EQ(std::set<int>(h.assignment.begin(), h.assignment.end()).size(), 6u);
  }
}

TEST(LexPerturb, ZeroEpsilonIsIdentity) {
  std::mt19937_64 rng(1);
  auto lp = build_assignment_lp(problem(oracle::random_costs(3, rng)));
  auto q = lex_perturb(lp, {0.0, 0.5});
  EXPECT_EQ(q.c, lp.c);
  EXPECT_EQ(q.A, lp.A);
}

TEST(LexPerturb, BreaksTies) {
  auto lp = lex_perturb(build_assignment_lp(problem(Matrix::Ones(2, 2))));
  auto a = solve_lp(lp);
  ASSERT_EQ(a.status, LpStatus::Optimal);
  // The two matchings now differ in cost, so exactly one is optimal.
  const double diag = lp.c(0) + lp.c(3), anti = lp.c(1) + lp.c(2);
  EXPECT_NE(diag, anti);
  const std::vector<int> expected = diag < anti ? std::vector<int>{0, 1} : std::vector<int>{1, 0};
  EXPECT_EQ(permutation_from_solution(2, a.x), expected);
}

TEST(LexPerturb, PreservesUniqueOptimum) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    Matrix c = oracle::random_costs(4, rng);
    auto s = solve_lp(lex_perturb(build_assignment_lp(problem(c))));
    EXPECT_EQ(permutation_from_solution(4, s.x), hungarian(problem(c)).assignment);
  }
}

TEST(LpBuilder, LowersInequalitiesAndFreeVariables) {
  // min |y| - 0  with y free, y >= -2, y <= 3 and t >= y, t >= -y.
  LpBuilder b;
  const int y = b.add_variable(0.0, true);
  const int t = b.add_variable(1.0, false);
  b.add_row({{t, 1.0}, {y, -1.0}}, Sense::GreaterEqual, 0.0);
  b.add_row({{t, 1.0}, {y, 1.0}}, Sense::GreaterEqual, 0.0);
  b.add_row({{y, 1.0}}, Sense::GreaterEqual, 1.5);
  b.add_constant(0.25);
  auto lp = b.build();
  auto s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::Optimal);
  Vector x = b.recover(s.x);
  EXPECT_NEAR(x(y), 1.5, 1e-12);
  EXPECT_NEAR(x(t), 1.5, 1e-12);
  EXPECT_NEAR(s.objective + b.constant(), 1.75, 1e-12);

  LpBuilder neg;
  const int z = neg.add_variable(1.0, true);
  neg.add_row({{z, 1.0}}, Sense::Equal, -4.0);
  auto s2 = solve_lp(neg.build());
  EXPECT_NEAR(neg.recover(s2.x)(z), -4.0, 1e-12);
}
