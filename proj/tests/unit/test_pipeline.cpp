#include <gtest/gtest.h>

#include <algorithm>

#include "tcr/inference.hpp"
#include "tcr/pipeline.hpp"
#include "tcr/synth.hpp"

using namespace tcr;

namespace {

Pipeline make_pipeline(std::uint64_t seed) {
  PopulationConfig p;
  p.n_districts = 2;
  p.seed = seed;
  PipelineConfig cfg;
  cfg.spec = CategorySpec::defaults(3, 3);
  return Pipeline(generate(p, ProductionParams::defaults(3, 3)), cfg);
}

}  // namespace

TEST(Pipeline, UnitWeightsReproduceThePointEstimate) {
  const auto p = make_pipeline(41);
  const std::vector<double> ones(p.cluster_count(), 1.0);
  const auto a = p.statistics(p.run()), b = p.statistics(p.run(ones));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), p.statistic_names().size());
  EXPECT_EQ(p.statistic_names().size(), 26u);
  EXPECT_EQ(p.statistic_names().front(), "objective[optimal]");
}

TEST(Pipeline, StudentsInheritTheirTeachersWeight) {
  const auto p = make_pipeline(42);
  std::vector<double> cw(p.cluster_count());
  for (std::size_t c = 0; c < cw.size(); ++c) cw[c] = 1.0 + static_cast<double>(c);
  const auto sw = p.student_weights(cw);
  const auto& ds = p.dataset();
  ASSERT_EQ(sw.size(), ds.students.size());
  for (std::size_t i = 0; i < ds.students.size(); ++i) {
    const int teacher = ds.sections[static_cast<std::size_t>(ds.students[i].realized_section)].realized_teacher;
    const auto& t = p.cluster_teachers();
    const auto c = static_cast<std::size_t>(std::find(t.begin(), t.end(), teacher) - t.begin());
    ASSERT_LT(c, t.size());
    EXPECT_EQ(sw[i], cw[c]);
  }
}

TEST(Pipeline, BootstrapEffectsStayNonNegative) {
  const auto p = make_pipeline(43);
  BootstrapConfig cfg;
  cfg.replications = 20;
  cfg.seed = 2;
  const auto r = bootstrap_run(
      p.cluster_count(), p.statistic_names(), [&](std::span<const double> w) { return p.statistics(p.run(w)); }, cfg);
  EXPECT_TRUE(r.skipped.empty());
  const auto names = p.statistic_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    // the plan maximizes the aggregate; single types may lose
    if (names[j].rfind("ARE", 0) != 0 || names[j].find(",all]") == std::string::npos) continue;
    for (double v : r.column(j)) EXPECT_GE(v, -1e-12) << names[j];
  }
  const auto opt = std::find(names.begin(), names.end(), "objective[optimal]") - names.begin();
  const auto worst = std::find(names.begin(), names.end(), "objective[worst]") - names.begin();
  for (const auto& d : r.draws) EXPECT_GE(d[static_cast<std::size_t>(opt)], d[static_cast<std::size_t>(worst)]);
}

TEST(Pipeline, RejectsContinuousTeacherMeasure) {
  PopulationConfig pc;
  pc.n_districts = 1;
  PipelineConfig cfg;
  cfg.spec = CategorySpec::defaults(3, 3);
  cfg.design.teacher = TeacherMeasure::continuous;
  EXPECT_ANY_THROW(Pipeline(generate(pc, ProductionParams::defaults(3, 3)), cfg));
}
