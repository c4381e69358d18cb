#include "tcr/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "tcr/design.hpp"
#include "tcr/error.hpp"

namespace tcr {

namespace {

// Students whose realized and assigned sections both have a peer.
std::vector<std::size_t> peer_sample(const Dataset& ds) {
  const auto realized = realized_rosters(ds);
  const auto assigned = assigned_rosters(ds);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.students.size(); ++i)
    if (realized[ds.students[i].realized_section].size() >= 2 && assigned[ds.students[i].assigned_section].size() >= 2)
      out.push_back(i);
  return out;
}

std::vector<double> student_attribute(const Dataset& ds, const std::string& name) {
  std::vector<double> v(ds.students.size());
  if (name == "baseline") {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = ds.students[i].baseline_score;
    return v;
  }
  auto ix = ds.student_aux(name);
  if (!ix) return {};
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = ds.students[i].aux[*ix];
  return v;
}

struct Column {
  std::string name;
  std::vector<double> values;  // per student row
};

// Fits y on the columns (plus absorbed block effects) over `sample` rows
// with no missing value, then tests `tested` jointly.
DiagnosticReport run(DiagnosticReport rep, const Dataset& ds, const std::vector<std::size_t>& sample,
                     const std::vector<double>& y, const std::vector<Column>& cols,
                     const std::vector<std::string>& tested, const DiagnosticOptions& opt) {
  rep.level = opt.level;
  for (const auto& c : cols) rep.regressors.push_back(c.name);

  std::vector<std::size_t> rows;
  for (auto i : sample) {
    bool ok = std::isfinite(y[i]);
    for (const auto& c : cols) ok = ok && std::isfinite(c.values[i]);
    if (ok) rows.push_back(i);
  }
  rep.n_obs = rows.size();
  rep.estimates.assign(cols.size(), std::nan(""));
  rep.std_errors.assign(cols.size(), std::nan(""));
  if (rows.size() < cols.size() + 2) {
    rep.skipped = true;
    rep.notice = "too few complete rows";
    return rep;
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd yv(n);
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cols.size()));
  std::vector<int> block;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = rows[static_cast<std::size_t>(r)];
    yv(r) = y[i];
    for (std::size_t c = 0; c < cols.size(); ++c) x(r, static_cast<Eigen::Index>(c)) = cols[c].values[i];
    block.push_back(ds.students[i].block);
  }
  const bool zero_dependent = yv.cwiseAbs().maxCoeff() <= 1e-12;
  if (zero_dependent) {
    rep.degenerate = true;
    rep.notice = "dependent variable is identically zero";
    rep.p = 1.0;
    return rep;
  }

  std::vector<std::string> names;
  for (const auto& c : cols) names.push_back(c.name);
  const auto absorbed = absorb_blocks(regression_design(yv, x, names, block));
  for (const auto& w : absorbed.meta.warnings) rep.notice += (rep.notice.empty() ? "" : "; ") + w;
  const auto est = ols_fit(absorbed);

  for (std::size_t c = 0; c < cols.size(); ++c)
    if (auto i = est.index_of(cols[c].name)) {
      rep.estimates[c] = est.coef(static_cast<Eigen::Index>(*i));
      rep.std_errors[c] = est.se(*i);
    }
  for (const auto& t : tested)
    if (est.index_of(t)) rep.tested.push_back(t);
  if (rep.tested.empty()) {
    rep.skipped = true;
    rep.notice += (rep.notice.empty() ? "" : "; ") + std::string("no tested regressor survives absorption");
    return rep;
  }
  const double tss = absorbed.y.squaredNorm();
  if (tss <= 1e-24 || est.rss <= 1e-20 * tss) {
    rep.degenerate = true;
    rep.notice += (rep.notice.empty() ? "" : "; ") + std::string("residuals are identically zero");
    rep.p = 1.0;
    return rep;
  }
  const auto w = wald_joint(est, rep.tested);
  rep.F = w.F;
  rep.df1 = w.df1;
  rep.df2 = w.df2;
  rep.p = w.p;
  rep.reject = rep.p < opt.level;
  return rep;
}

std::vector<Column> dummies(const std::string& prefix, const std::vector<int>& labels, int count) {
  std::vector<Column> out;
  for (int k = 1; k < count; ++k) {
    Column c{prefix + "[" + std::to_string(k) + "]", std::vector<double>(labels.size())};
    for (std::size_t i = 0; i < labels.size(); ++i) c.values[i] = labels[i] == k ? 1.0 : 0.0;
    out.push_back(std::move(c));
  }
  return out;
}

// Assigned-roster leave-own-out fractions of each non-reference type.
std::vector<Column> assigned_fractions(const Dataset& ds, const std::vector<int>& type, int K) {
  const auto rosters = assigned_rosters(ds);
  std::vector<Column> out;
  for (int k = 1; k < K; ++k) out.push_back({"Xbar*[" + std::to_string(k) + "]", std::vector<double>(ds.students.size(), std::nan(""))});
  for (const auto& roster : rosters) {
    if (roster.size() < 2) continue;
    std::vector<long> counts(static_cast<std::size_t>(K), 0);
    for (auto i : roster) ++counts[static_cast<std::size_t>(type[i])];
    for (auto i : roster)
      for (int k = 1; k < K; ++k)
        out[static_cast<std::size_t>(k - 1)].values[i] =
            static_cast<double>(counts[static_cast<std::size_t>(k)] - (type[i] == k ? 1 : 0)) /
            static_cast<double>(roster.size() - 1);
  }
  return out;
}

std::vector<int> assigned_levels(const Dataset& ds, const Discretization& disc) {
  std::vector<int> out;
  for (const auto& s : ds.students)
    out.push_back(disc.teacher_level[static_cast<std::size_t>(ds.sections[static_cast<std::size_t>(s.assigned_section)].assigned_teacher)]);
  return out;
}

std::vector<std::string> names_of(const std::vector<Column>& cols) {
  std::vector<std::string> out;
  for (const auto& c : cols) out.push_back(c.name);
  return out;
}

}  // namespace

DiagnosticReport balance_test(const Dataset& ds, std::vector<std::string> covariates, const DiagnosticOptions& opt) {
  DiagnosticReport rep;
  rep.test = "balance";
  rep.dependent = "assigned teacher practice score";
  if (covariates.empty()) {
    covariates.push_back("baseline");
    covariates.insert(covariates.end(), ds.student_aux_names.begin(), ds.student_aux_names.end());
  }
  std::vector<Column> cols;
  for (const auto& c : covariates) {
    auto v = student_attribute(ds, c);
    if (v.empty()) {
      rep.notice += (rep.notice.empty() ? "" : "; ") + ("covariate '" + c + "' not present; skipped");
      continue;
    }
    cols.push_back({c, std::move(v)});
  }
  if (cols.empty()) {
    rep.skipped = true;
    return rep;
  }
  std::vector<double> y;
  for (const auto& s : ds.students)
    y.push_back(ds.teachers[static_cast<std::size_t>(ds.sections[static_cast<std::size_t>(s.assigned_section)].assigned_teacher)].practice_score);
  std::vector<std::size_t> sample(ds.students.size());
  for (std::size_t i = 0; i < sample.size(); ++i) sample[i] = i;
  const auto tested = names_of(cols);
  auto out = run(rep, ds, sample, y, cols, tested, opt);
  return out;
}

DiagnosticReport assumption1_test(const Dataset& ds, const CategorySpec& spec, const std::string& attribute,
                                  const DiagnosticOptions& opt) {
  DiagnosticReport rep;
  rep.test = "assumption1";
  rep.dependent = "realized - assigned teacher " + attribute;
  auto ix = ds.teacher_aux(attribute);
  if (!ix) {
    rep.skipped = true;
    rep.notice = "teacher attribute '" + attribute + "' not present; test skipped";
    return rep;
  }
  const auto disc = discretize(ds, spec);
  std::vector<double> y;
  for (const auto& s : ds.students) {
    const auto& realized = ds.teachers[static_cast<std::size_t>(ds.sections[static_cast<std::size_t>(s.realized_section)].realized_teacher)];
    const auto& assigned = ds.teachers[static_cast<std::size_t>(ds.sections[static_cast<std::size_t>(s.assigned_section)].assigned_teacher)];
    y.push_back(realized.aux[*ix] - assigned.aux[*ix]);
  }
  auto cols = dummies("X", disc.student_type, spec.K);
  auto w = dummies("W*", assigned_levels(ds, disc), spec.L());
  auto f = assigned_fractions(ds, disc.student_type, spec.K);
  cols.insert(cols.end(), w.begin(), w.end());
  cols.insert(cols.end(), f.begin(), f.end());
  return run(rep, ds, peer_sample(ds), y, cols, names_of(cols), opt);
}

DiagnosticReport assumption2_test(const Dataset& ds, const CategorySpec& spec, const std::string& attribute,
                                  const DiagnosticOptions& opt) {
  DiagnosticReport rep;
  rep.test = "assumption2";
  rep.dependent = "realized - assigned peer mean " + attribute;
  const auto v = student_attribute(ds, attribute);
  if (v.empty()) {
    rep.skipped = true;
    rep.notice = "student attribute '" + attribute + "' not present; test skipped";
    return rep;
  }
  const auto disc = discretize(ds, spec);
  const auto realized = peer_mean(ds, v, true);
  const auto assigned = peer_mean(ds, v, false);
  std::vector<double> y(v.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = realized[i] - assigned[i];
  auto cols = dummies("X", disc.student_type, spec.K);
  auto f = assigned_fractions(ds, disc.student_type, spec.K);
  auto w = dummies("W*", assigned_levels(ds, disc), spec.L());
  cols.insert(cols.end(), f.begin(), f.end());
  cols.insert(cols.end(), w.begin(), w.end());
  return run(rep, ds, peer_sample(ds), y, cols, names_of(w), opt);
}

DiagnosticReport restriction_test(const Dataset& ds, const CategorySpec& spec, const DiagnosticOptions& opt) {
  DiagnosticReport rep;
  rep.test = "restriction";
  rep.dependent = "realized peer mean baseline";
  const auto z = student_attribute(ds, "baseline");
  const auto disc = discretize(ds, spec);
  const auto y = peer_mean(ds, z, true);
  std::vector<Column> cols{{"baseline", z}, {"assigned peer mean baseline", peer_mean(ds, z, false)}};
  auto w = dummies("W*", assigned_levels(ds, disc), spec.L());
  cols.insert(cols.end(), w.begin(), w.end());
  return run(rep, ds, peer_sample(ds), y, cols, names_of(w), opt);
}

std::vector<DiagnosticReport> run_all_diagnostics(const Dataset& ds, const CategorySpec& spec,
                                                  const DiagnosticOptions& opt) {
  std::vector<DiagnosticReport> out;
  out.push_back(balance_test(ds, {}, opt));
  for (const auto& a : ds.teacher_aux_names) out.push_back(assumption1_test(ds, spec, a, opt));
  if (ds.teacher_aux_names.empty()) {
    DiagnosticReport r;
    r.test = "assumption1";
    r.skipped = true;
    r.notice = "no teacher auxiliary attributes; test skipped";
    out.push_back(r);
  }
  out.push_back(assumption2_test(ds, spec, "baseline", opt));
  for (const auto& a : ds.student_aux_names) out.push_back(assumption2_test(ds, spec, a, opt));
  out.push_back(restriction_test(ds, spec, opt));
  return out;
}

}  // namespace tcr
