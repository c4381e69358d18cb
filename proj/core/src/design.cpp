#include "tcr/design.hpp"

#include <algorithm>
#include <cmath>

#include "tcr/csv.hpp"
#include "tcr/error.hpp"

namespace tcr {

std::string w_name(int l, bool assigned) { return std::string(assigned ? "W*[" : "W[") + std::to_string(l) + "]"; }

std::string xw_name(int k, int l, bool assigned) { return "X[" + std::to_string(k) + "]x" + w_name(l, assigned); }

std::string wxbar_name(int l, int k, bool assigned) {
  return w_name(l, assigned) + "x" + (assigned ? "Xbar*[" : "Xbar[") + std::to_string(k) + "]";
}

Discretization discretize(const Dataset& ds, const CategorySpec& spec) {
  spec.validate();
  Discretization out;
  out.K = spec.K;
  out.L = spec.L();
  std::vector<double> z;
  std::vector<int> district;
  for (const auto& s : ds.students) {
    z.push_back(s.baseline_score);
    district.push_back(s.district);
  }
  if (spec.student_rule == CategorySpec::StudentRule::explicit_cutoffs) {
    out.student_type = discretize_students_fixed(z, spec.student_cutoffs);
    out.quantile_rule = "explicit cutoffs; label = #cutoffs strictly below score";
  } else {
    auto sd = discretize_students(z, district, spec.K);
    out.student_type = std::move(sd.labels);
    out.district_cuts = std::move(sd.district_cuts);
    out.quantile_rule = std::move(sd.rule);
  }
  std::vector<double> scores;
  for (const auto& t : ds.teachers) scores.push_back(t.practice_score);
  out.teacher_level = discretize_teachers(scores, spec.teacher_cutoffs);
  return out;
}

void DesignMatrix::check_shapes() const {
  const auto N = static_cast<Eigen::Index>(n());
  if (endog.rows() != N || exog.rows() != N || instruments.rows() != N || weights.size() != N ||
      static_cast<Eigen::Index>(cluster.size()) != N || static_cast<Eigen::Index>(block.size()) != N ||
      static_cast<Eigen::Index>(rows.size()) != N)
    throw InvalidInput("design blocks disagree on the number of rows");
  if (static_cast<std::size_t>(endog.cols()) != endog_names.size() ||
      static_cast<std::size_t>(exog.cols()) != exog_names.size() ||
      static_cast<std::size_t>(instruments.cols()) != instrument_names.size())
    throw InvalidInput("design column names disagree with column counts");
}

namespace {

struct ColumnSet {
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;

  void add(std::string name, std::size_t n) {
    names.push_back(std::move(name));
    cols.emplace_back(n, 0.0);
  }

  // Drops exactly-zero columns, recording them; returns the dense matrix.
  Eigen::MatrixXd finish(std::vector<std::string>& kept, DesignMetadata& meta, const char* what) {
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const bool zero = std::all_of(cols[c].begin(), cols[c].end(), [](double v) { return v == 0.0; });
      if (zero) {
        meta.dropped_columns.push_back(names[c]);
        meta.warnings.push_back(std::string("empty category cell: dropped ") + what + " column " + names[c]);
      } else {
        keep.push_back(c);
      }
    }
    const auto n = cols.empty() ? 0 : cols[0].size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
      for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[keep[j]][i];
      kept.push_back(names[keep[j]]);
    }
    return m;
  }
};

}  // namespace

DesignMatrix build_design(const Dataset& ds, const CategorySpec& spec, const DesignOptions& options) {
  return build_design(ds, discretize(ds, spec), spec, options);
}

DesignMatrix build_design(const Dataset& ds, const Discretization& disc, const CategorySpec& spec,
                          const DesignOptions& options) {
  spec.validate();
  const int K = spec.K;
  const bool continuous = options.teacher == TeacherMeasure::continuous;
  const int nw = continuous ? 1 : spec.L() - 1;
  const auto realized = realized_rosters(ds);
  const auto assigned = assigned_rosters(ds);

  DesignMatrix m;
  m.meta.K = K;
  m.meta.L = spec.L();
  m.meta.include_lambda = options.include_lambda;
  m.meta.quantile_rule = disc.quantile_rule;
  m.meta.district_cuts = disc.district_cuts;

  std::vector<std::size_t> sample;
  for (std::size_t i = 0; i < ds.students.size(); ++i) {
    const auto& s = ds.students[i];
    if (realized[s.realized_section].size() >= 2 && assigned[s.assigned_section].size() >= 2) sample.push_back(i);
  }
  m.meta.excluded_students = ds.students.size() - sample.size();
  if (m.meta.excluded_students > 0)
    m.meta.warnings.push_back(std::to_string(m.meta.excluded_students) +
                              " students excluded: realized or assigned section has fewer than two students");
  if (sample.empty()) throw DataError("no students with defined peer groups");
  const auto n = sample.size();

  // leave-own-out fractions, exact counts per section
  auto fractions = [&](const std::vector<std::vector<std::size_t>>& rosters, std::size_t i, int section) {
    std::vector<double> f(static_cast<std::size_t>(K - 1), 0.0);
    const auto& roster = rosters[static_cast<std::size_t>(section)];
    std::vector<long> counts(static_cast<std::size_t>(K), 0);
    for (auto j : roster) ++counts[static_cast<std::size_t>(disc.student_type[j])];
    --counts[static_cast<std::size_t>(disc.student_type[i])];
    const auto peers = static_cast<double>(roster.size() - 1);
    for (int k = 1; k < K; ++k) f[static_cast<std::size_t>(k - 1)] = static_cast<double>(counts[static_cast<std::size_t>(k)]) / peers;
    return f;
  };
  auto teacher_row = [&](int teacher) {
    std::vector<double> w(static_cast<std::size_t>(nw), 0.0);
    if (continuous) {
      w[0] = ds.teachers[static_cast<std::size_t>(teacher)].practice_score;
    } else {
      const int lev = disc.teacher_level[static_cast<std::size_t>(teacher)];
      if (lev > 0) w[static_cast<std::size_t>(lev - 1)] = 1.0;
    }
    return w;
  };
  auto tname = [&](int l, bool star) { return continuous ? std::string(star ? "FFT*" : "FFT") : w_name(l, star); };

  ColumnSet en, ex, in;
  for (int l = 1; l <= nw; ++l) en.add(tname(l, false), n);
  if (options.include_eta)
    for (int k = 1; k < K; ++k)
      for (int l = 1; l <= nw; ++l) en.add("X[" + std::to_string(k) + "]x" + tname(l, false), n);
  if (options.include_lambda)
    for (int l = 1; l <= nw; ++l)
      for (int k = 1; k < K; ++k) en.add(tname(l, false) + "xXbar[" + std::to_string(k) + "]", n);

  ex.add("const", n);
  for (int k = 1; k < K; ++k) ex.add("X[" + std::to_string(k) + "]", n);
  for (int k = 1; k < K; ++k) ex.add("Xbar*[" + std::to_string(k) + "]", n);
  for (int k = 1; k < K; ++k)
    for (int j = 1; j < K; ++j) ex.add("X[" + std::to_string(k) + "]xXbar*[" + std::to_string(j) + "]", n);

  for (int l = 1; l <= nw; ++l) in.add(tname(l, true), n);
  if (options.include_eta)
    for (int k = 1; k < K; ++k)
      for (int l = 1; l <= nw; ++l) in.add("X[" + std::to_string(k) + "]x" + tname(l, true), n);
  if (options.include_lambda)
    for (int l = 1; l <= nw; ++l)
      for (int k = 1; k < K; ++k) in.add(tname(l, true) + "xXbar*[" + std::to_string(k) + "]", n);

  m.y.resize(static_cast<Eigen::Index>(n));
  const auto k1 = static_cast<std::size_t>(K - 1);
  for (std::size_t r = 0; r < n; ++r) {
    const auto i = sample[r];
    const auto& s = ds.students[i];
    m.y(static_cast<Eigen::Index>(r)) = s.outcome;
    m.rows.push_back(i);
    m.block.push_back(s.block);
    m.cluster.push_back(s.block);

    std::vector<double> x(k1, 0.0);
    if (disc.student_type[i] > 0) x[static_cast<std::size_t>(disc.student_type[i] - 1)] = 1.0;
    const auto xbar = fractions(realized, i, s.realized_section);
    const auto xbar_star = fractions(assigned, i, s.assigned_section);
    const auto w = teacher_row(ds.sections[static_cast<std::size_t>(s.realized_section)].realized_teacher);
    const auto w_star = teacher_row(ds.sections[static_cast<std::size_t>(s.assigned_section)].assigned_teacher);

    std::size_t c = 0;
    for (std::size_t l = 0; l < w.size(); ++l) en.cols[c++][r] = w[l];
    if (options.include_eta)
      for (std::size_t k = 0; k < k1; ++k)
        for (std::size_t l = 0; l < w.size(); ++l) en.cols[c++][r] = x[k] * w[l];
    if (options.include_lambda)
      for (std::size_t l = 0; l < w.size(); ++l)
        for (std::size_t k = 0; k < k1; ++k) en.cols[c++][r] = w[l] * xbar[k];

    c = 0;
    ex.cols[c++][r] = 1.0;
    for (std::size_t k = 0; k < k1; ++k) ex.cols[c++][r] = x[k];
    for (std::size_t k = 0; k < k1; ++k) ex.cols[c++][r] = xbar_star[k];
    for (std::size_t k = 0; k < k1; ++k)
      for (std::size_t j = 0; j < k1; ++j) ex.cols[c++][r] = x[k] * xbar_star[j];

    c = 0;
    for (std::size_t l = 0; l < w_star.size(); ++l) in.cols[c++][r] = w_star[l];
    if (options.include_eta)
      for (std::size_t k = 0; k < k1; ++k)
        for (std::size_t l = 0; l < w_star.size(); ++l) in.cols[c++][r] = x[k] * w_star[l];
    if (options.include_lambda)
      for (std::size_t l = 0; l < w_star.size(); ++l)
        for (std::size_t k = 0; k < k1; ++k) in.cols[c++][r] = w_star[l] * xbar_star[k];
  }
  m.endog = en.finish(m.endog_names, m.meta, "endogenous");
  m.exog = ex.finish(m.exog_names, m.meta, "control");
  m.instruments = in.finish(m.instrument_names, m.meta, "instrument");
  m.weights = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  return m;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& a, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), a.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = a.row(idx[r]);
  return out;
}

void drop_vanished(Eigen::MatrixXd& a, std::vector<std::string>& names, const Eigen::MatrixXd& before,
                   DesignMetadata& meta, const char* what) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double scale = before.col(c).cwiseAbs().maxCoeff();
    const double after = a.col(c).cwiseAbs().maxCoeff();
    if (names[static_cast<std::size_t>(c)] == "const" || after <= 1e-12 * (1.0 + scale)) {
      if (names[static_cast<std::size_t>(c)] != "const") {
        meta.dropped_columns.push_back(names[static_cast<std::size_t>(c)]);
        meta.warnings.push_back(std::string("dropped ") + what + " column " + names[static_cast<std::size_t>(c)] +
                                ": constant within every block");
      }
      continue;
    }
    keep.push_back(c);
  }
  Eigen::MatrixXd out(a.rows(), static_cast<Eigen::Index>(keep.size()));
  std::vector<std::string> kept;
  for (std::size_t j = 0; j < keep.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = a.col(keep[j]);
    kept.push_back(names[static_cast<std::size_t>(keep[j])]);
  }
  a = std::move(out);
  names = std::move(kept);
}

}  // namespace

DesignMatrix absorb_blocks(const DesignMatrix& in) {
  in.check_shapes();
  DesignMatrix m;
  m.meta = in.meta;
  m.endog_names = in.endog_names;
  m.exog_names = in.exog_names;
  m.instrument_names = in.instrument_names;

  std::map<int, std::vector<Eigen::Index>> groups;
  for (std::size_t i = 0; i < in.n(); ++i) groups[in.block[i]].push_back(static_cast<Eigen::Index>(i));
  std::vector<Eigen::Index> keep;
  std::size_t singletons = 0;
  for (auto& [b, idx] : groups) {
    if (idx.size() < 2) {
      ++singletons;
      continue;
    }
    keep.insert(keep.end(), idx.begin(), idx.end());
  }
  std::sort(keep.begin(), keep.end());
  if (singletons > 0)
    m.meta.warnings.push_back(std::to_string(singletons) + " single-row blocks dropped before absorbing block effects");
  if (keep.empty()) throw DataError("no block has two or more rows");

  m.y = take_rows(in.y, keep);
  m.endog = take_rows(in.endog, keep);
  m.exog = take_rows(in.exog, keep);
  m.instruments = take_rows(in.instruments, keep);
  m.weights = take_rows(in.weights, keep);
  for (auto i : keep) {
    m.cluster.push_back(in.cluster[static_cast<std::size_t>(i)]);
    m.block.push_back(in.block[static_cast<std::size_t>(i)]);
    m.rows.push_back(in.rows[static_cast<std::size_t>(i)]);
  }
  const Eigen::MatrixXd endog0 = m.endog, exog0 = m.exog, inst0 = m.instruments;

  std::map<int, std::vector<Eigen::Index>> kept_groups;
  for (std::size_t r = 0; r < m.n(); ++r) kept_groups[m.block[r]].push_back(static_cast<Eigen::Index>(r));
  auto demean = [&](auto& a) {
    for (const auto& [b, idx] : kept_groups) {
      double wsum = 0;
      Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(a.cols());
      for (auto r : idx) {
        wsum += m.weights(r);
        s += m.weights(r) * a.row(r);
      }
      if (!(wsum > 0)) throw NumericalError("block with zero total weight");
      s /= wsum;
      for (auto r : idx) a.row(r) -= s;
    }
  };
  demean(m.y);
  demean(m.endog);
  demean(m.exog);
  demean(m.instruments);
  drop_vanished(m.endog, m.endog_names, endog0, m.meta, "endogenous");
  drop_vanished(m.exog, m.exog_names, exog0, m.meta, "control");
  drop_vanished(m.instruments, m.instrument_names, inst0, m.meta, "instrument");
  m.absorbed = true;
  m.meta.absorbed_blocks = kept_groups.size();
  return m;
}

DesignMatrix add_block_dummies(const DesignMatrix& in) {
  in.check_shapes();
  DesignMatrix m = in;
  std::vector<int> blocks(in.block.begin(), in.block.end());
  std::sort(blocks.begin(), blocks.end());
  blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
  const auto extra = static_cast<Eigen::Index>(blocks.size()) - 1;
  if (extra <= 0) return m;
  m.exog.conservativeResize(Eigen::NoChange, in.exog.cols() + extra);
  m.exog.rightCols(extra).setZero();
  for (std::size_t r = 0; r < in.n(); ++r) {
    const auto pos = std::lower_bound(blocks.begin(), blocks.end(), in.block[r]) - blocks.begin();
    if (pos > 0) m.exog(static_cast<Eigen::Index>(r), in.exog.cols() + pos - 1) = 1.0;
  }
  for (std::size_t b = 1; b < blocks.size(); ++b) m.exog_names.push_back("block[" + std::to_string(blocks[b]) + "]");
  return m;
}

DesignMatrix regression_design(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors,
                               const std::vector<std::string>& names, const std::vector<int>& block) {
  DesignMatrix m;
  const auto n = y.size();
  m.y = y;
  m.exog.resize(n, regressors.cols() + 1);
  m.exog.col(0).setOnes();
  m.exog.rightCols(regressors.cols()) = regressors;
  m.exog_names.push_back("const");
  m.exog_names.insert(m.exog_names.end(), names.begin(), names.end());
  m.endog.resize(n, 0);
  m.instruments.resize(n, 0);
  m.cluster = block;
  m.block = block;
  m.weights = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) m.rows.push_back(static_cast<std::size_t>(i));
  m.check_shapes();
  return m;
}

void write_design_csv(const DesignMatrix& m, const std::filesystem::path& path) {
  m.check_shapes();
  csv::Writer w(path);
  std::vector<std::string> header{"student_row", "y", "weight", "cluster"};
  header.insert(header.end(), m.endog_names.begin(), m.endog_names.end());
  header.insert(header.end(), m.exog_names.begin(), m.exog_names.end());
  header.insert(header.end(), m.instrument_names.begin(), m.instrument_names.end());
  w.row(header);
  for (std::size_t r = 0; r < m.n(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    std::vector<std::string> f{std::to_string(m.rows[r]), csv::format_double(m.y(i)), csv::format_double(m.weights(i)),
                               std::to_string(m.cluster[r])};
    for (Eigen::Index c = 0; c < m.endog.cols(); ++c) f.push_back(csv::format_double(m.endog(i, c)));
    for (Eigen::Index c = 0; c < m.exog.cols(); ++c) f.push_back(csv::format_double(m.exog(i, c)));
    for (Eigen::Index c = 0; c < m.instruments.cols(); ++c) f.push_back(csv::format_double(m.instruments(i, c)));
    w.row(f);
  }
}

}  // namespace tcr
