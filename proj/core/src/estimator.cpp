#include "tcr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tcr/error.hpp"
#include "tcr/stats.hpp"

namespace tcr {

std::optional<std::size_t> IVEstimate::index_of(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

double IVEstimate::coefficient(const std::string& name) const {
  auto i = index_of(name);
  if (!i) throw InvalidInput("estimate has no coefficient named " + name);
  return coef(static_cast<Eigen::Index>(*i));
}

double IVEstimate::se(std::size_t i) const {
  const auto k = static_cast<Eigen::Index>(i);
  return std::sqrt(std::max(0.0, vcov(k, k)));
}

double IVEstimate::se(const std::string& name) const {
  auto i = index_of(name);
  if (!i) throw InvalidInput("estimate has no coefficient named " + name);
  return se(*i);
}

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

// QR with a rank check that names the columns the pivoting pushed out.
Eigen::ColPivHouseholderQR<Eigen::MatrixXd> checked_qr(const Eigen::MatrixXd& a, const std::vector<std::string>& names,
                                                       const std::string& context) {
  if (a.rows() < a.cols())
    throw NumericalError(context + ": fewer rows (" + std::to_string(a.rows()) + ") than columns (" +
                         std::to_string(a.cols()) + ")");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < a.cols()) {
    std::vector<std::string> bad;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index j = qr.rank(); j < a.cols(); ++j) bad.push_back(names[static_cast<std::size_t>(perm(j))]);
    throw NumericalError(context + ": rank deficient; collinear column(s): " + join(bad));
  }
  return qr;
}

Eigen::MatrixXd inverse_gram(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr) {
  const auto p = qr.cols();
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd inner = Rinv * Rinv.transpose();
  const auto& P = qr.colsPermutation();
  Eigen::MatrixXd out = P * inner * P.transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd sandwich(const Eigen::MatrixXd& xh, const Eigen::VectorXd& e, const Eigen::MatrixXd& bread,
                         std::span<const int> clusters, std::size_t* n_clusters) {
  if (static_cast<Eigen::Index>(clusters.size()) != xh.rows())
    throw InvalidInput("cluster labels do not match the number of observations");
  std::map<int, Eigen::VectorXd> scores;
  for (Eigen::Index i = 0; i < xh.rows(); ++i) {
    auto [it, fresh] = scores.try_emplace(clusters[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(xh.cols()));
    it->second.noalias() += xh.row(i).transpose() * e(i);
  }
  const auto G = scores.size();
  if (G < 2) throw InvalidInput("cluster-robust covariance needs at least two clusters");
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(xh.cols(), xh.cols());
  for (const auto& [g, s] : scores) meat.noalias() += s * s.transpose();
  const double N = static_cast<double>(xh.rows()), k = static_cast<double>(xh.cols());
  const double c = (static_cast<double>(G) / (G - 1.0)) * ((N - 1.0) / (N - k));
  Eigen::MatrixXd v = c * bread * meat * bread;
  if (n_clusters) *n_clusters = G;
  return 0.5 * (v + v.transpose());
}

struct Prepared {
  Eigen::VectorXd sw;  // sqrt(weights)
  Eigen::VectorXd y;
  Eigen::MatrixXd x;
  std::vector<std::string> names;
};

Prepared prepare(const DesignMatrix& m) {
  m.check_shapes();
  if (m.n() == 0) throw DataError("empty design");
  Prepared p;
  if ((m.weights.array() < 0).any() || !m.weights.allFinite()) throw InvalidInput("weights must be finite and nonnegative");
  p.sw = m.weights.array().sqrt();
  p.y = m.y.cwiseProduct(p.sw);
  p.x = hcat(m.endog, m.exog);
  p.x = p.sw.asDiagonal() * p.x;
  p.names = m.endog_names;
  p.names.insert(p.names.end(), m.exog_names.begin(), m.exog_names.end());
  return p;
}

IVEstimate finish(Method method, const Prepared& p, const Eigen::MatrixXd& xh, const DesignMatrix& m,
                  const std::string& context) {
  const auto qr = checked_qr(xh, p.names, context);
  IVEstimate est;
  est.method = method;
  est.names = p.names;
  est.coef = qr.solve(p.y);
  est.scaled_residuals = p.y - p.x * est.coef;
  est.bread = inverse_gram(qr);
  est.score_regressors = xh;
  est.cluster = m.cluster;
  est.n_obs = m.n();
  est.vcov = sandwich(xh, est.scaled_residuals, est.bread, m.cluster, &est.n_clusters);
  est.rss = est.scaled_residuals.squaredNorm();
  const double wsum = m.weights.sum();
  const double ybar = m.weights.dot(m.y) / wsum;
  const double tss = (m.y.array() - ybar).square().matrix().dot(m.weights);
  est.r_squared = tss > 0 ? 1.0 - est.rss / tss : 0.0;
  return est;
}

}  // namespace

IVEstimate ols_fit(const DesignMatrix& m) {
  const auto p = prepare(m);
  return finish(Method::ols, p, p.x, m, "OLS");
}

IVEstimate tsls_fit(const DesignMatrix& m) {
  const auto p = prepare(m);
  const auto ne = m.endog.cols();
  if (m.instruments.cols() < ne)
    throw NumericalError("2SLS: " + std::to_string(m.instruments.cols()) + " excluded instruments for " +
                         std::to_string(ne) + " endogenous columns");
  std::vector<std::string> znames = m.instrument_names;
  znames.insert(znames.end(), m.exog_names.begin(), m.exog_names.end());
  const Eigen::MatrixXd z = p.sw.asDiagonal() * hcat(m.instruments, m.exog);
  const auto zqr = checked_qr(z, znames, "2SLS first stage");

  Eigen::MatrixXd xh = p.x;
  for (Eigen::Index j = 0; j < ne; ++j) {
    bool own = false;
    for (Eigen::Index c = 0; c < m.instruments.cols() && !own; ++c) own = m.instruments.col(c) == m.endog.col(j);
    if (!own) xh.col(j) = z * zqr.solve(p.x.col(j));
  }
  // a rank failure here means some endogenous column has no first-stage
  // variation beyond the controls
  return finish(Method::tsls, p, xh, m, "2SLS first stage (fitted endogenous columns)");
}

Eigen::MatrixXd cluster_cov(const IVEstimate& est, std::span<const int> clusters) {
  return sandwich(est.score_regressors, est.scaled_residuals, est.bread, clusters, nullptr);
}

WaldResult wald_joint(const IVEstimate& est, std::span<const std::size_t> subset) {
  if (subset.empty()) throw InvalidInput("Wald test needs a nonempty coefficient subset");
  const auto q = static_cast<Eigen::Index>(subset.size());
  Eigen::VectorXd b(q);
  Eigen::MatrixXd v(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    if (subset[static_cast<std::size_t>(i)] >= static_cast<std::size_t>(est.coef.size()))
      throw InvalidInput("Wald subset index out of range");
    b(i) = est.coef(static_cast<Eigen::Index>(subset[static_cast<std::size_t>(i)]));
    for (Eigen::Index j = 0; j < q; ++j)
      v(i, j) = est.vcov(static_cast<Eigen::Index>(subset[static_cast<std::size_t>(i)]),
                         static_cast<Eigen::Index>(subset[static_cast<std::size_t>(j)]));
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(v);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw NumericalError("Wald test: covariance submatrix is singular");
  WaldResult r;
  r.df1 = static_cast<int>(q);
  r.df2 = static_cast<double>(est.n_clusters) - 1.0;
  r.F = std::max(0.0, b.dot(lu.solve(b)) / static_cast<double>(q));
  r.p = stats::f_upper_tail(r.F, r.df1, r.df2);
  return r;
}

WaldResult wald_joint(const IVEstimate& est, const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    auto i = est.index_of(n);
    if (!i) throw InvalidInput("Wald test: no coefficient named " + n);
    idx.push_back(*i);
  }
  return wald_joint(est, idx);
}

namespace {

// Regression of v on [instruments | exog] and a cluster-robust chi-square of
// the excluded-instrument coefficients. Returns nullopt when the fit is exact.
std::optional<double> excluded_chi2(const DesignMatrix& m, const Eigen::VectorXd& v) {
  DesignMatrix r;
  r.y = v;
  r.endog.resize(static_cast<Eigen::Index>(m.n()), 0);
  r.exog = hcat(m.instruments, m.exog);
  r.instruments.resize(static_cast<Eigen::Index>(m.n()), 0);
  r.exog_names = m.instrument_names;
  r.exog_names.insert(r.exog_names.end(), m.exog_names.begin(), m.exog_names.end());
  r.cluster = m.cluster;
  r.block = m.block;
  r.weights = m.weights;
  r.rows = m.rows;
  const auto est = ols_fit(r);
  const double scale = v.cwiseProduct(m.weights.cwiseSqrt()).squaredNorm();
  if (est.rss <= 1e-20 * (scale + 1e-300)) return std::nullopt;
  const auto q = static_cast<std::size_t>(m.instruments.cols());
  std::vector<std::size_t> idx(q);
  for (std::size_t i = 0; i < q; ++i) idx[i] = i;
  const auto w = wald_joint(est, idx);
  return w.F * static_cast<double>(q);
}

}  // namespace

FTestReport first_stage_F(const DesignMatrix& m) {
  m.check_shapes();
  const auto ne = m.endog.cols();
  const auto q = static_cast<int>(m.instruments.cols());
  if (q < ne) throw NumericalError("first stage: fewer excluded instruments than endogenous columns");
  std::size_t G = 0;
  {
    std::vector<int> c = m.cluster;
    std::sort(c.begin(), c.end());
    G = static_cast<std::size_t>(std::unique(c.begin(), c.end()) - c.begin());
  }
  const double df2 = static_cast<double>(G) - 1.0;
  FTestReport rep;
  for (Eigen::Index j = 0; j < ne; ++j) {
    FirstStageRow row;
    row.endogenous = m.endog_names[static_cast<std::size_t>(j)];
    row.df1 = q;
    row.df2 = df2;
    row.conditional_df1 = q - static_cast<int>(ne) + 1;

    const Eigen::VectorXd xj = m.endog.col(j);
    if (auto chi2 = excluded_chi2(m, xj)) {
      row.F = *chi2 / q;
      row.p = stats::f_upper_tail(row.F, row.df1, df2);
    } else {
      row.F = kFirstStageCap;
      row.p = 0.0;
      row.capped = true;
    }

    // residual of x_j after 2SLS on the other endogenous columns
    DesignMatrix aux;
    aux.y = xj;
    aux.endog.resize(m.endog.rows(), ne - 1);
    for (Eigen::Index c = 0, o = 0; c < ne; ++c)
      if (c != j) {
        aux.endog.col(o++) = m.endog.col(c);
        aux.endog_names.push_back(m.endog_names[static_cast<std::size_t>(c)]);
      }
    aux.exog = m.exog;
    aux.exog_names = m.exog_names;
    aux.instruments = m.instruments;
    aux.instrument_names = m.instrument_names;
    aux.cluster = m.cluster;
    aux.block = m.block;
    aux.weights = m.weights;
    aux.rows = m.rows;
    const auto partial = ne > 1 ? tsls_fit(aux) : ols_fit(aux);
    Eigen::VectorXd eps = xj - hcat(aux.endog, aux.exog) * partial.coef;
    if (auto chi2 = excluded_chi2(m, eps)) {
      row.conditional_F = *chi2 / row.conditional_df1;
      row.conditional_p = stats::f_upper_tail(row.conditional_F, row.conditional_df1, df2);
    } else {
      row.conditional_F = kFirstStageCap;
      row.conditional_p = 0.0;
      row.capped = true;
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

PeerGradient peer_gradient(const IVEstimate& est, int /*x*/, int w, int K) {
  PeerGradient g;
  g.identified = Eigen::VectorXd::Zero(K - 1);
  for (int k = 1; k < K; ++k)
    if (est.index_of(wxbar_name(1, k))) g.lambda_estimated = true;
  if (w <= 0) return g;
  for (int k = 1; k < K; ++k)
    if (auto i = est.index_of(wxbar_name(w, k))) g.identified(k - 1) = est.coef(static_cast<Eigen::Index>(*i));
  return g;
}

}  // namespace tcr
