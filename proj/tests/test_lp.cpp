#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mbcg/lp.hpp"
#include "oracles.hpp"

using namespace mbcg::lp;

namespace {

LinearProgram to_program(const oracle::DenseLp& d) {
  LinearProgram lp(Sense::maximize);
  for (int j = 0; j < d.n; ++j) lp.add_variable(d.c[j], d.lo[j], d.hi[j]);
  for (std::size_t i = 0; i < d.a.size(); ++i) {
    std::vector<Term> terms;
    for (int j = 0; j < d.n; ++j) {
      if (d.a[i][j] != 0) terms.push_back({j, d.a[i][j]});
    }
    Relation rel = d.rel[i] < 0 ? Relation::less_equal : d.rel[i] > 0 ? Relation::greater_equal : Relation::equal;
    lp.add_row(terms, rel, d.b[i]);
  }
  return lp;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Complementary slackness residual in the program's own sense.
double complementarity(const LinearProgram& lp, const LpSolution& s) {
  double worst = 0;
  for (int i = 0; i < lp.row_count(); ++i) {
    const double slack = lp.row(i).rhs - lp.row_activity(i, s.values);
    worst = std::max(worst, std::abs(s.duals[i] * slack));
  }
  for (int j = 0; j < lp.variable_count(); ++j) {
    const auto& v = lp.variable(j);
    const double to_lo = s.values[j] - v.lower;
    const double to_hi = std::isfinite(v.upper) ? v.upper - s.values[j] : 1e300;
    worst = std::max(worst, std::abs(s.reduced_costs[j]) * std::min(std::abs(to_lo), std::abs(to_hi)));
  }
  return worst;
}

}  // namespace

TEST(SolveLp, SingleBoundRow) {
  LinearProgram lp;
  int x = lp.add_variable(1.0);
  lp.add_row({{x, 1.0}}, Relation::less_equal, 5.0, "cap");
  auto s = solve_lp(lp);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, 5.0, 1e-9);
  EXPECT_NEAR(s.duals[*lp.row_index("cap")], 1.0, 1e-9);
}

TEST(SolveLp, DegenerateTwoRows) {
  LinearProgram lp;
  int x = lp.add_variable(1.0);
  int y = lp.add_variable(1.0);
  lp.add_row({{x, 1}, {y, 1}}, Relation::less_equal, 3.0);
  lp.add_row({{x, 1}}, Relation::less_equal, 1.0);
  auto s = solve_lp(lp);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, 3.0, 1e-9);
  EXPECT_NEAR(s.duals[0], 1.0, 1e-9);
  EXPECT_NEAR(s.duals[1], 0.0, 1e-9);
}

TEST(SolveLp, Infeasible) {
  LinearProgram lp;
  int x = lp.add_variable(1.0);
  lp.add_row({{x, 1}}, Relation::less_equal, 1.0);
  lp.add_row({{x, 1}}, Relation::greater_equal, 2.0);
  EXPECT_EQ(solve_lp(lp).status, Status::infeasible);
}

TEST(SolveLp, Unbounded) {
  LinearProgram lp;
  int x = lp.add_variable(1.0);
  int y = lp.add_variable(0.0);
  lp.add_row({{x, 1}, {y, -1}}, Relation::less_equal, 1.0);
  EXPECT_EQ(solve_lp(lp).status, Status::unbounded);
}

TEST(SolveLp, MinimizeWithEqualityAndGreaterRows) {
  LinearProgram lp(Sense::minimize);
  int x = lp.add_variable(2.0);
  int y = lp.add_variable(3.0);
  lp.add_row({{x, 1}, {y, 1}}, Relation::greater_equal, 4.0);
  lp.add_row({{x, 1}, {y, -1}}, Relation::equal, 1.0);
  auto s = solve_lp(lp);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.values[x], 2.5, 1e-9);
  EXPECT_NEAR(s.values[y], 1.5, 1e-9);
  EXPECT_NEAR(s.objective, 9.5, 1e-9);
  EXPECT_NEAR(dual_objective(lp, s), s.objective, 1e-9);
}

TEST(SolveLp, NoRows) {
  LinearProgram lp;
  lp.add_variable(2.0, 0.0, 3.0);
  lp.add_variable(-1.0, 0.0, 7.0);
  auto s = solve_lp(lp);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, 6.0, 1e-12);
}

TEST(SolveLp, ValidationRejectsBadInput) {
  LinearProgram lp;
  int x = lp.add_variable(1.0);
  lp.add_row({{x, std::nan("")}}, Relation::less_equal, 1.0);
  EXPECT_THROW(solve_lp(lp), LpError);

  LinearProgram lp2;
  lp2.add_variable(1.0);
  lp2.add_row({{3, 1.0}}, Relation::less_equal, 1.0);
  EXPECT_THROW(solve_lp(lp2), LpError);

  LinearProgram lp3;
  lp3.add_variable(1.0, -kInf, kInf);
  EXPECT_THROW(solve_lp(lp3), LpError);

  LinearProgram lp4;
  lp4.add_row({}, Relation::less_equal, 1.0, "r");
  EXPECT_THROW(lp4.add_row({}, Relation::less_equal, 1.0, "r"), LpError);
}

TEST(SolveLp, RowsRetrievableByLabel) {
  LinearProgram lp;
  lp.add_variable(1.0, 0, kInf, false, "x");
  lp.add_row({{0, 1}}, Relation::less_equal, 1.0, "a");
  lp.add_row({{0, 2}}, Relation::less_equal, 1.0, "b");
  EXPECT_EQ(lp.row_index("b"), 1);
  EXPECT_EQ(lp.variable_index("x"), 0);
  EXPECT_FALSE(lp.row_index("c").has_value());
}

TEST(SolveLp, RandomMatchesVertexEnumeration) {
  std::mt19937_64 rng(12345);
  int optimal = 0;
  for (int t = 0; t < 150; ++t) {
    auto d = oracle::random_lp(rng);
    auto lp = to_program(d);
    auto expected = oracle::lp_by_vertex_enumeration(d);
    auto s = solve_lp(lp);
    if (!expected) {
      EXPECT_EQ(s.status, Status::infeasible) << "trial " << t;
      continue;
    }
    ASSERT_EQ(s.status, Status::optimal) << "trial " << t;
    ++optimal;
    EXPECT_LT(rel_diff(s.objective, *expected), 1e-6) << "trial " << t;
    EXPECT_LT(lp.max_violation(s.values), 1e-6) << "trial " << t;
    EXPECT_LT(rel_diff(dual_objective(lp, s), s.objective), 1e-6) << "trial " << t;
    EXPECT_LT(complementarity(lp, s), 1e-6) << "trial " << t;
  }
  EXPECT_GE(optimal, 50);
}

TEST(SolveLp, DualSignsForPackingRows) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int t = 0; t < 20; ++t) {
    LinearProgram lp;
    for (int j = 0; j < 6; ++j) lp.add_variable(u(rng));
    for (int i = 0; i < 4; ++i) {
      std::vector<Term> terms;
      for (int j = 0; j < 6; ++j) terms.push_back({j, u(rng)});
      lp.add_row(terms, Relation::less_equal, 10.0);
    }
    auto s = solve_lp(lp);
    ASSERT_EQ(s.status, Status::optimal);
    for (double y : s.duals) EXPECT_GE(y, -1e-9);
  }
}

TEST(SolveLp, WarmStartAfterAddingColumns) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  LinearProgram lp;
  lp.add_variable(1.0);
  for (int i = 0; i < 5; ++i) lp.add_row({{0, u(rng)}}, Relation::less_equal, 5.0 + i);
  auto s = solve_lp(lp);
  for (int round = 0; round < 10; ++round) {
    int j = lp.add_variable(u(rng));
    for (int i = 0; i < 5; ++i) lp.add_term(i, j, u(rng));
    auto warm = solve_lp(lp, {}, &s.basis);
    auto cold = solve_lp(lp);
    ASSERT_EQ(warm.status, Status::optimal);
    EXPECT_NEAR(warm.objective, cold.objective, 1e-9 * std::max(1.0, cold.objective));
    EXPECT_GE(warm.objective, s.objective - 1e-9);
    s = warm;
  }
}

TEST(SolveLp, Deterministic) {
  std::mt19937_64 rng(5);
  auto d = oracle::random_lp(rng, 8, 8);
  auto lp = to_program(d);
  auto a = solve_lp(lp);
  auto b = solve_lp(lp);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.duals, b.duals);
}

TEST(SolveLp, LpFormatExport) {
  LinearProgram lp;
  int x = lp.add_variable(1.0, 0, 4, true, "x");
  int y = lp.add_variable(-2.0, 0, kInf, false, "y");
  lp.add_row({{x, 1}, {y, -1}}, Relation::less_equal, 3, "row one");
  auto text = lp.to_lp_format();
  EXPECT_NE(text.find("Maximize"), std::string::npos);
  EXPECT_NE(text.find("row_one: 1 x - 1 y <= 3"), std::string::npos);
  EXPECT_NE(text.find("Generals\n x"), std::string::npos);
}

TEST(SolveMilp, TotallyUnimodularMatchesLp) {
  // Bipartite assignment.
  LinearProgram lp;
  const double w[3][3] = {{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) lp.add_variable(w[i][j], 0, 1, true);
  }
  for (int i = 0; i < 3; ++i) {
    lp.add_row({{3 * i, 1}, {3 * i + 1, 1}, {3 * i + 2, 1}}, Relation::less_equal, 1);
    lp.add_row({{i, 1}, {3 + i, 1}, {6 + i, 1}}, Relation::less_equal, 1);
  }
  auto relaxed = solve_lp(lp);
  auto integer = solve_milp(lp);
  ASSERT_EQ(integer.status, Status::optimal);
  EXPECT_NEAR(integer.objective, relaxed.objective, 1e-9);
  EXPECT_NEAR(integer.objective, 11.0, 1e-9);
}

TEST(SolveMilp, KnapsackMatchesEnumeration) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> v(1, 40), w(1, 30);
  for (int t = 0; t < 25; ++t) {
    std::vector<double> value, weight;
    LinearProgram lp;
    std::vector<Term> row;
    for (int i = 0; i < 12; ++i) {
      value.push_back(v(rng));
      weight.push_back(w(rng));
      row.push_back({lp.add_variable(value.back(), 0, 1, true), weight.back()});
    }
    const double cap = 70;
    lp.add_row(row, Relation::less_equal, cap);
    auto s = solve_milp(lp);
    ASSERT_EQ(s.status, Status::optimal);
    EXPECT_NEAR(s.objective, oracle::knapsack_brute_force(value, weight, cap), 1e-9) << "trial " << t;
    auto relaxed = solve_lp(lp);
    EXPECT_LE(s.objective, relaxed.objective + 1e-9);
    for (double x : s.values) EXPECT_NEAR(x, std::round(x), 1e-6);
    for (std::size_t k = 1; k < s.gap_history.size(); ++k) EXPECT_LE(s.gap_history[k], s.gap_history[k - 1]);
  }
}

TEST(SolveMilp, GeneralIntegersAndContinuous) {
  // max t  s.t. t <= 3 z1 + 2 z2, t <= 4 z2, z1 + z2 <= 5
  LinearProgram lp;
  int t = lp.add_variable(1.0);
  int z1 = lp.add_variable(0.0, 0, kInf, true);
  int z2 = lp.add_variable(0.0, 0, kInf, true);
  lp.add_row({{t, 1}, {z1, -3}, {z2, -2}}, Relation::less_equal, 0);
  lp.add_row({{t, 1}, {z2, -4}}, Relation::less_equal, 0);
  lp.add_row({{z1, 1}, {z2, 1}}, Relation::less_equal, 5);
  auto s = solve_milp(lp);
  ASSERT_EQ(s.status, Status::optimal);
  // Enumerate z1 + z2 <= 5.
  double best = 0;
  for (int a = 0; a <= 5; ++a) {
    for (int b = 0; a + b <= 5; ++b) best = std::max(best, std::min(3.0 * a + 2.0 * b, 4.0 * b));
  }
  EXPECT_NEAR(s.objective, best, 1e-9);
}

TEST(SolveMilp, InfeasibleInteger) {
  LinearProgram lp;
  int x = lp.add_variable(1.0, 0, 1, true);
  lp.add_row({{x, 2}}, Relation::equal, 1);
  EXPECT_EQ(solve_milp(lp).status, Status::infeasible);
}

TEST(SolveMilp, GapReachedReportsBound) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> v(10, 40), w(5, 30);
  LinearProgram lp;
  std::vector<Term> r1, r2;
  for (int i = 0; i < 30; ++i) {
    int j = lp.add_variable(v(rng), 0, 1, true);
    r1.push_back({j, static_cast<double>(w(rng))});
    r2.push_back({j, static_cast<double>(w(rng))});
  }
  lp.add_row(r1, Relation::less_equal, 150);
  lp.add_row(r2, Relation::less_equal, 170);
  SolveOptions opt;
  opt.relative_gap = 0.05;
  auto s = solve_milp(lp, opt);
  ASSERT_TRUE(s.status == Status::gap_reached || s.status == Status::optimal);
  EXPECT_LE(s.relative_gap, 0.05 + 1e-12);
  EXPECT_GE(s.best_bound, s.objective - 1e-9);
  EXPECT_NEAR(s.relative_gap, relative_gap(s.best_bound, s.objective), 1e-12);
  auto exact = solve_milp(lp);
  ASSERT_EQ(exact.status, Status::optimal);
  EXPECT_LE(s.objective, exact.objective + 1e-9);
  EXPECT_GE(s.best_bound, exact.objective - 1e-9);
  EXPECT_GE(s.objective, exact.objective / 1.05 - 1e-9);
}

TEST(SolveMilp, TimeLimitKeepsIncumbent) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> v(100, 140), w(100, 140);
  LinearProgram lp;
  std::vector<std::vector<Term>> rows(5);
  for (int i = 0; i < 60; ++i) {
    int j = lp.add_variable(v(rng), 0, 1, true);
    for (auto& r : rows) r.push_back({j, static_cast<double>(w(rng))});
  }
  for (auto& r : rows) lp.add_row(r, Relation::less_equal, 1500);
  SolveOptions opt;
  opt.time_limit_seconds = 0.2;
  auto s = solve_milp(lp, opt);
  ASSERT_TRUE(s.status == Status::time_limit || s.status == Status::optimal);
  ASSERT_TRUE(s.has_solution());
  EXPECT_LT(lp.max_violation(s.values), 1e-6);
  EXPECT_LT(s.wall_seconds, 5.0);
}

TEST(SolveMilp, MinimizationFlipsGap) {
  // min 3x + 2y, x + y >= 3.5, integers.
  LinearProgram lp(Sense::minimize);
  int x = lp.add_variable(3.0, 0, kInf, true);
  int y = lp.add_variable(2.0, 0, kInf, true);
  lp.add_row({{x, 1}, {y, 1}}, Relation::greater_equal, 3.5);
  auto s = solve_milp(lp);
  ASSERT_EQ(s.status, Status::optimal);
  EXPECT_NEAR(s.objective, 8.0, 1e-9);
}
