#include <gtest/gtest.h>

#include "tcr/dataset_io.hpp"
#include "tcr/diagnostics.hpp"
#include "tcr/synth.hpp"

using namespace tcr;

namespace {

Dataset population(EndogenousMode mode, std::uint64_t seed, double teacher_rate = 0.3, double student_rate = 0.05) {
  PopulationConfig p;
  p.n_districts = 4;
  p.endogenous_mode = mode;
  p.noncompliance_rate_teachers = teacher_rate;
  p.noncompliance_rate_students = student_rate;
  p.seed = seed;
  return generate(p, ProductionParams::defaults(3, 3));
}

}  // namespace

TEST(Diagnostics, MissingAttributeIsSkippedWithNotice) {
  const auto ds = import_dataset(TCR_FIXTURE_DIR "/six_students");
  const auto r = assumption1_test(ds, CategorySpec::defaults(3, 3), "tenure");
  EXPECT_TRUE(r.skipped);
  EXPECT_NE(r.notice.find("tenure"), std::string::npos);
  EXPECT_FALSE(r.reject);
  const auto s = assumption2_test(ds, CategorySpec::defaults(3, 3), "attendance");
  EXPECT_TRUE(s.skipped);
  EXPECT_NE(s.notice.find("attendance"), std::string::npos);
}

TEST(Diagnostics, PerfectComplianceIsDegenerate) {
  const auto ds = population(EndogenousMode::none, 11, 0.0, 0.0);
  const auto spec = CategorySpec::defaults(3, 3);
  const auto a1 = assumption1_test(ds, spec, "experience");
  EXPECT_TRUE(a1.degenerate);
  EXPECT_FALSE(a1.reject);
  const auto a2 = assumption2_test(ds, spec, "baseline");
  EXPECT_TRUE(a2.degenerate);
  EXPECT_FALSE(a2.reject);
}

TEST(Diagnostics, ReportShapesAndLevel) {
  const auto ds = population(EndogenousMode::none, 12);
  DiagnosticOptions opt;
  opt.level = 0.10;
  const auto all = run_all_diagnostics(ds, CategorySpec::defaults(3, 3), opt);
  ASSERT_FALSE(all.empty());
  EXPECT_EQ(all.front().test, "balance");
  for (const auto& r : all) {
    EXPECT_EQ(r.level, 0.10);
    if (r.skipped || r.degenerate) continue;
    EXPECT_EQ(r.estimates.size(), r.regressors.size());
    EXPECT_EQ(r.std_errors.size(), r.regressors.size());
    EXPECT_EQ(static_cast<std::size_t>(r.df1), r.tested.size());
    EXPECT_GE(r.p, 0.0);
    EXPECT_LE(r.p, 1.0);
    EXPECT_EQ(r.reject, r.p < 0.10);
    EXPECT_GT(r.n_obs, 0u);
  }
}

TEST(Diagnostics, PlantedViolationsAreDetected) {
  const auto spec = CategorySpec::defaults(3, 3);
  EXPECT_TRUE(balance_test(population(EndogenousMode::rigged_assignment, 21)).reject);
  EXPECT_TRUE(assumption1_test(population(EndogenousMode::teacher_sorting, 22), spec, "experience").reject);
  EXPECT_TRUE(
      assumption2_test(population(EndogenousMode::student_sorting_on_assigned_teacher, 23), spec, "baseline").reject);
  EXPECT_TRUE(restriction_test(population(EndogenousMode::student_sorting_on_assigned_teacher, 24), spec).reject);
}

TEST(Diagnostics, BalanceSkipsUnknownCovariate) {
  const auto ds = population(EndogenousMode::none, 13);
  const auto r = balance_test(ds, {"baseline", "shoe_size"});
  EXPECT_NE(r.notice.find("shoe_size"), std::string::npos);
  EXPECT_EQ(r.tested.size(), 1u);
}
