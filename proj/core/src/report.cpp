#include "tcr/report.hpp"

#include <cmath>

#include "tcr/csv.hpp"
#include "tcr/stats.hpp"

namespace tcr {

std::string significance_stars(double p) {
  if (!(p == p)) return "";
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.10) return "*";
  return "";
}

namespace {

double coef_p(const IVEstimate& est, std::size_t i) {
  const double se = est.se(i);
  if (!(se > 0)) return std::nan("");
  const double df = est.n_clusters > 1 ? static_cast<double>(est.n_clusters - 1) : 1.0;
  return stats::t_two_sided(est.coef(static_cast<Eigen::Index>(i)) / se, df);
}

}  // namespace

void write_estimate_csv(const std::filesystem::path& path, const IVEstimate& est) {
  csv::Writer w(path);
  w.line("term", "coef", "se", "t", "p", "stars");
  for (std::size_t i = 0; i < est.names.size(); ++i) {
    const double b = est.coef(static_cast<Eigen::Index>(i));
    const double se = est.se(i);
    const double p = coef_p(est, i);
    w.line(est.names[i], b, se, se > 0 ? b / se : std::nan(""), p, significance_stars(p));
  }
}

void write_comparison_csv(const std::filesystem::path& path, const IVEstimate& ols, const IVEstimate& tsls) {
  csv::Writer w(path);
  w.line("term", "coef_ols", "se_ols", "stars_ols", "coef_2sls", "se_2sls", "stars_2sls");
  const double nan = std::nan("");
  for (std::size_t i = 0; i < tsls.names.size(); ++i) {
    const auto& name = tsls.names[i];
    const auto j = ols.index_of(name);
    const double pt = coef_p(tsls, i);
    if (j) {
      const double po = coef_p(ols, *j);
      w.line(name, ols.coef(static_cast<Eigen::Index>(*j)), ols.se(*j), significance_stars(po),
             tsls.coef(static_cast<Eigen::Index>(i)), tsls.se(i), significance_stars(pt));
    } else {
      w.line(name, nan, nan, "", tsls.coef(static_cast<Eigen::Index>(i)), tsls.se(i), significance_stars(pt));
    }
  }
  w.line("N", static_cast<double>(ols.n_obs), nan, "", static_cast<double>(tsls.n_obs), nan, "");
  w.line("clusters", static_cast<double>(ols.n_clusters), nan, "", static_cast<double>(tsls.n_clusters), nan, "");
  w.line("R2", ols.r_squared, nan, "", tsls.r_squared, nan, "");
}

void write_first_stage_csv(const std::filesystem::path& path, const FTestReport& fs) {
  csv::Writer w(path);
  w.line("endogenous", "F", "df1", "df2", "p", "conditional_F", "conditional_df1", "conditional_p", "capped");
  for (const auto& r : fs.rows)
    w.line(r.endogenous, r.F, r.df1, r.df2, r.p, r.conditional_F, r.conditional_df1, r.conditional_p, r.capped);
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticReport>& reports) {
  csv::Writer w(path);
  w.line("test", "dependent", "n_obs", "F", "df1", "df2", "p", "level", "reject", "degenerate", "skipped", "notice");
  for (const auto& r : reports)
    w.line(r.test, r.dependent, r.n_obs, r.F, r.df1, r.df2, r.p, r.level, r.reject, r.degenerate, r.skipped,
           r.notice);
}

void write_diagnostic_coefficients_csv(const std::filesystem::path& path,
                                       const std::vector<DiagnosticReport>& reports) {
  csv::Writer w(path);
  w.line("test", "regressor", "estimate", "se", "tested");
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.regressors.size(); ++i) {
      bool tested = false;
      for (const auto& t : r.tested) tested = tested || t == r.regressors[i];
      w.line(r.test, r.regressors[i], i < r.estimates.size() ? r.estimates[i] : std::nan(""),
             i < r.std_errors.size() ? r.std_errors[i] : std::nan(""), tested);
    }
}

void write_plans_csv(const std::filesystem::path& path, const ClassroomValueTable& table,
                     const ReallocationReport& rep) {
  csv::Writer w(path);
  w.line("cluster", "teacher_id", "cell", "status_quo_level", "optimal_level", "worst_level");
  for (std::size_t c = 0; c < table.clusters.size(); ++c) {
    const auto& cl = table.clusters[c];
    w.line(c, cl.teacher, table.cell_names[static_cast<std::size_t>(cl.cell)], rep.status_quo[c],
           rep.optimal.level[c], rep.worst.level[c]);
  }
}

void write_effects_csv(const std::filesystem::path& path, const ReallocationReport& rep) {
  csv::Writer w(path);
  w.line("panel", "subgroup", "conditional", "gain", "students", "reassigned", "reassigned_fraction", "weight",
         "empty");
  for (const auto& c : rep.effects)
    w.line(c.panel, c.subgroup, c.conditional, c.result.gain, c.result.students, c.result.reassigned,
           c.result.reassigned_fraction, c.result.weight, c.result.empty);
  const double nan = std::nan("");
  w.line("objective", "optimal", false, rep.optimal.objective, 0, 0, nan, nan, false);
  w.line("objective", "status_quo", false, rep.status_quo_objective, 0, 0, nan, nan, false);
  w.line("objective", "worst", false, rep.worst.objective, 0, 0, nan, nan, false);
}

void write_posterior_csv(const std::filesystem::path& path, const std::vector<PosteriorSummary>& s) {
  csv::Writer w(path);
  w.line("statistic", "point", "se", "lower", "upper", "draws", "degenerate", "low_b");
  for (const auto& x : s) w.line(x.name, x.point, x.se, x.lower, x.upper, x.draws, x.degenerate, x.low_b);
}

void write_draws_csv(const std::filesystem::path& path, const BootstrapResult& r) {
  csv::Writer w(path);
  w.line("statistic", "replication", "value");
  for (std::size_t j = 0; j < r.names.size(); ++j)
    for (std::size_t b = 0; b < r.draws.size(); ++b)
      if (!r.draws[b].empty()) w.line(r.names[j], b, r.draws[b][j]);
}

}  // namespace tcr
