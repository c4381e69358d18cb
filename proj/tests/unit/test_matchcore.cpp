#include <gtest/gtest.h>

#include <cmath>

#include "tcr/error.hpp"
#include "tcr/matchcore.hpp"

using namespace tcr::matchcore;

namespace {

std::vector<std::vector<Rational>> per_class(std::initializer_list<Rational> p1) {
  std::vector<std::vector<Rational>> out;
  for (auto p : p1) out.push_back({Rational(1) - p, p});
  return out;
}

// Seat-by-seat expected outcome of a classroom-level rule, computed straight
// from the compositions.
double seat_oracle(const ToyPopulation& pop, const std::vector<std::vector<Rational>>& rule,
                   const MatchSurface::Function& m) {
  double v = 0;
  for (std::size_t c = 0; c < pop.compositions.size(); ++c) {
    const auto& t = pop.compositions[c].student_types;
    for (std::size_t i = 0; i < t.size(); ++i) {
      double ones = 0;
      for (std::size_t j = 0; j < t.size(); ++j)
        if (j != i) ones += t[j];
      const std::vector<double> peer{ones / double(t.size() - 1)};
      for (int w = 0; w < 2; ++w)
        v += to_double(pop.compositions[c].probability) / double(t.size()) * to_double(rule[c][w]) * m(t[i], peer, w);
    }
  }
  return v;
}

}  // namespace

TEST(Matchcore, ToyDensityMatchesTable) {
  const auto d = own_peer_density(two_type_example());
  ASSERT_EQ(d.support.size(), 6u);
  auto mass = [&](int x, Rational xbar) { return d.mass[*d.find({x, {xbar}})]; };
  EXPECT_EQ(mass(0, Rational(0)), Rational(1, 4));
  EXPECT_EQ(mass(0, Rational(1, 2)), Rational(1, 6));
  EXPECT_EQ(mass(0, Rational(1)), Rational(1, 12));
  EXPECT_EQ(mass(1, Rational(0)), Rational(1, 12));
  EXPECT_EQ(mass(1, Rational(1, 2)), Rational(1, 6));
  EXPECT_EQ(mass(1, Rational(1)), Rational(1, 4));
  EXPECT_EQ(d.total_mass(), Rational(1));
}

TEST(Matchcore, SeatRowsCarryTheirSupportMass) {
  const auto rows = seat_rows(two_type_example());
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[5].point.own, 1);
  EXPECT_EQ(rows[5].point.peer[0], Rational(0));
  EXPECT_EQ(rows[5].density, Rational(1, 12));
}

TEST(Matchcore, StatusQuoAndCounterfactualAreFeasible) {
  const auto pop = two_type_example();
  const auto d = own_peer_density(pop);
  for (auto rule : {per_class({Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2)}),
                    per_class({Rational(1, 3), Rational(1, 2), Rational(1, 2), Rational(2, 3)})}) {
    const auto f = check_feasible(rule_from_classroom_probabilities(pop, d, rule), d, pop.teacher_marginal);
    EXPECT_TRUE(f.feasible);
    EXPECT_EQ(f.max_violation, Rational(0));
  }
}

TEST(Matchcore, MarginalViolationIsDetectedExactly) {
  const auto pop = two_type_example();
  const auto d = own_peer_density(pop);
  const auto rule = rule_from_classroom_probabilities(pop, d, per_class({Rational(1), Rational(1), Rational(1, 2), Rational(1)}));
  const auto f = check_feasible(rule, d, pop.teacher_marginal);
  EXPECT_FALSE(f.feasible);
  EXPECT_EQ(f.max_violation, Rational(3, 8));
}

TEST(Matchcore, ConstantRuleIsFeasibleButSplitsNothing) {
  const auto pop = two_type_example();
  const auto d = own_peer_density(pop);
  const auto rule = constant_rule(d, pop.teacher_marginal);
  EXPECT_TRUE(check_feasible(rule, d, pop.teacher_marginal).feasible);
  EXPECT_TRUE(is_classroom_consistent(rule, pop, d));
}

TEST(Matchcore, AreMatchesSeatEnumeration) {
  const auto pop = two_type_example();
  const auto d = own_peer_density(pop);
  const auto cf = per_class({Rational(1, 3), Rational(1, 2), Rational(1, 2), Rational(2, 3)});
  const auto sq = per_class({Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2)});
  const MatchSurface::Function fns[] = {
      [](int x, const std::vector<double>&, int w) { return double(x * w); },
      [](int, const std::vector<double>& p, int w) { return p[0] * w + 0.3; },
      [](int x, const std::vector<double>& p, int w) { return std::sin(x + 2 * p[0] + 3 * w); }};
  for (const auto& fn : fns) {
    const MatchSurface m(d, 2, fn);
    EXPECT_NEAR(are_nonparametric(m, rule_from_classroom_probabilities(pop, d, cf), d), seat_oracle(pop, cf, fn), 1e-14);
    EXPECT_NEAR(are_nonparametric(m, rule_from_classroom_probabilities(pop, d, sq), d), seat_oracle(pop, sq, fn), 1e-14);
  }
  // x * w: status quo 1/4, counterfactual 7/24
  const MatchSurface xw(d, 2, fns[0]);
  EXPECT_NEAR(are_nonparametric(xw, rule_from_classroom_probabilities(pop, d, cf), d) -
                  are_nonparametric(xw, rule_from_classroom_probabilities(pop, d, sq), d),
              1.0 / 24, 1e-15);
}

TEST(Matchcore, SeparableSurfaceHasZeroReallocationEffect) {
  const auto pop = two_type_example();
  const auto d = own_peer_density(pop);
  const MatchSurface m(d, 2, [](int x, const std::vector<double>& p, int w) { return 2.0 * x - p[0] + 0.5 * w; });
  const double sq = are_nonparametric(m, constant_rule(d, pop.teacher_marginal), d);
  for (const auto& plan : feasible_classroom_plans(pop))
    EXPECT_NEAR(are_nonparametric(m, rule_from_classroom_levels(pop, d, plan), d), sq, 1e-14);
}

TEST(Matchcore, FeasiblePlansAndBestPlan) {
  const auto pop = two_type_example();
  const auto plans = feasible_classroom_plans(pop);
  EXPECT_EQ(plans.size(), 6u);  // choose 2 of 4 classrooms
  const auto d = own_peer_density(pop);
  const MatchSurface m(d, 2, [](int x, const std::vector<double>&, int w) { return double(x * w); });
  const auto best = best_classroom_plan(pop, m, true);
  EXPECT_EQ(best.levels, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_NEAR(best.value, 5.0 / 12, 1e-15);
  const auto worst = best_classroom_plan(pop, m, false);
  EXPECT_EQ(worst.levels, (std::vector<int>{1, 1, 0, 0}));
  EXPECT_NEAR(worst.value, 1.0 / 12, 1e-15);
}

TEST(Matchcore, ValidationRejectsBadPopulations) {
  auto pop = two_type_example();
  pop.compositions[0].probability = Rational(1, 3);
  EXPECT_THROW(pop.validate(), tcr::InvalidInput);
  pop = two_type_example();
  pop.teacher_marginal = {Rational(1, 2), Rational(1, 3)};
  EXPECT_THROW(pop.validate(), tcr::InvalidInput);
  pop = two_type_example();
  pop.compositions[1].student_types = {0, 2, 1};
  EXPECT_THROW(pop.validate(), tcr::InvalidInput);
}

TEST(Matchcore, RuleRowsMustBeDistributions) {
  const auto pop = two_type_example();
  const auto d = own_peer_density(pop);
  auto rule = constant_rule(d, pop.teacher_marginal);
  rule.rows[0] = {Rational(1, 2), Rational(1, 3)};
  EXPECT_THROW(check_feasible(rule, d, pop.teacher_marginal), tcr::InvalidInput);
}

TEST(Matchcore, MissingSurfaceValueIsAnError) {
  const auto pop = two_type_example();
  const auto d = own_peer_density(pop);
  MatchSurface m;
  m.set(d.support[0], 0, 1.0);
  EXPECT_THROW(are_nonparametric(m, constant_rule(d, pop.teacher_marginal), d), tcr::InvalidInput);
}
