#include <gtest/gtest.h>

#include "tcr/assignment.hpp"
#include "tcr/error.hpp"
#include "tcr/rng.hpp"

using namespace tcr;

namespace {

AssignmentProblem random_problem(Rng& rng, Sense sense, bool integer_values) {
  AssignmentProblem p;
  p.L = 2 + static_cast<int>(rng.below(3));
  p.sense = sense;
  const int cells = 1 + static_cast<int>(rng.below(3));
  for (int c = 0; c < cells; ++c) {
    const int size = 1 + static_cast<int>(rng.below(6));
    std::vector<int> supply(static_cast<std::size_t>(p.L), 0);
    for (int i = 0; i < size; ++i) {
      ++supply[rng.below(static_cast<std::size_t>(p.L))];
      std::vector<double> v(static_cast<std::size_t>(p.L));
      for (auto& x : v) x = integer_values ? static_cast<double>(rng.below(3)) : rng.normal();
      p.values.push_back(v);
      p.cell.push_back(c);
    }
    p.supply.push_back(supply);
  }
  return p;
}

}  // namespace

TEST(Assignment, MatchesBruteForceIncludingTies) {
  Rng rng(2024);
  for (int t = 0; t < 300; ++t) {
    const auto sense = t % 2 ? Sense::minimize : Sense::maximize;
    const auto p = random_problem(rng, sense, t % 3 == 0);
    const auto a = solve_assignment(p), b = brute_force_assignment(p);
    ASSERT_TRUE(plan_feasible(p, a.level));
    EXPECT_NEAR(a.objective, b.objective, 1e-9);
    EXPECT_EQ(a.level, b.level) << "instance " << t;
    EXPECT_NEAR(plan_objective(p, a.level), a.objective, 1e-12);
  }
}

TEST(Assignment, TiesResolveLexicographically) {
  AssignmentProblem p;
  p.L = 2;
  p.values = {{1, 1}, {1, 1}, {1, 1}};
  p.cell = {0, 0, 0};
  p.supply = {{2, 1}};
  const auto plan = solve_assignment(p);
  EXPECT_EQ(plan.level, (std::vector<int>{0, 0, 1}));
  EXPECT_TRUE(plan.degenerate_tie);
  EXPECT_EQ(plan.objective, 3.0);
}

TEST(Assignment, UniqueOptimumIsNotATie) {
  AssignmentProblem p;
  p.L = 2;
  p.values = {{0, 5}, {0, 1}};
  p.cell = {0, 0};
  p.supply = {{1, 1}};
  const auto best = solve_assignment(p);
  EXPECT_EQ(best.level, (std::vector<int>{1, 0}));
  EXPECT_FALSE(best.degenerate_tie);
  p.sense = Sense::minimize;
  EXPECT_EQ(solve_assignment(p).level, (std::vector<int>{0, 1}));
}

TEST(Assignment, SupplyMismatchNamesTheCell) {
  AssignmentProblem p;
  p.L = 2;
  p.values = {{0, 1}, {0, 1}};
  p.cell = {0, 1};
  p.supply = {{1, 0}, {1, 1}};
  p.cell_names = {"district 0 / elementary", "district 0 / secondary"};
  try {
    solve_assignment(p);
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("district 0 / secondary"), std::string::npos) << e.what();
  }
}

TEST(Assignment, RejectsMalformedProblems) {
  AssignmentProblem p;
  p.L = 2;
  p.values = {{0, std::nan("")}};
  p.cell = {0};
  p.supply = {{1, 0}};
  EXPECT_THROW(solve_assignment(p), InvalidInput);
  p.values = {{0}};
  EXPECT_THROW(solve_assignment(p), InvalidInput);
  p.values = {{0, 1}};
  p.cell = {3};
  EXPECT_THROW(solve_assignment(p), InvalidInput);
}

TEST(Assignment, BruteForceRefusesLargeCells) {
  AssignmentProblem p;
  p.L = 2;
  for (int i = 0; i < 12; ++i) {
    p.values.push_back({0, 1});
    p.cell.push_back(0);
  }
  p.supply = {{6, 6}};
  EXPECT_THROW(brute_force_assignment(p), InvalidInput);
  EXPECT_NO_THROW(solve_assignment(p));
}
