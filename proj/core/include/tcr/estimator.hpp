#pragma once

// OLS and 2SLS with cluster-robust covariance.
//
// Weighted fits scale every row by sqrt(weight); with unit weights the
// arithmetic is identical to the unweighted fit. Covariance:
//   V = c * B * (sum_g s_g s_g') * B,   B = (Xh'Xh)^-1,  s_g = sum_{i in g} xh_i e_i
//   c = G/(G-1) * (N-1)/(N-k)
// where Xh is the regressor matrix (first-stage fitted values for 2SLS), k
// the number of estimated coefficients (absorbed block effects excluded),
// N rows and G clusters.

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcr/design.hpp"

namespace tcr {

enum class Method { ols, tsls };

struct IVEstimate {
  Method method = Method::ols;
  std::vector<std::string> names;  // endogenous names, then exogenous names
  Eigen::VectorXd coef;
  Eigen::MatrixXd vcov;
  std::size_t n_obs = 0;
  std::size_t n_clusters = 0;
  double r_squared = 0.0;  // on the (possibly within-transformed) data
  double rss = 0.0;

  // Ingredients kept so the covariance can be recomputed under other
  // cluster definitions.
  Eigen::MatrixXd score_regressors;  // sqrt(w) * Xh
  Eigen::VectorXd scaled_residuals;  // sqrt(w) * (y - X b)
  Eigen::MatrixXd bread;             // (Xh'W Xh)^-1
  std::vector<int> cluster;

  std::optional<std::size_t> index_of(const std::string& name) const;
  double coefficient(const std::string& name) const;  // throws if absent
  double se(std::size_t i) const;
  double se(const std::string& name) const;
};

// Regresses y on [endog | exog] treating every column as exogenous.
IVEstimate ols_fit(const DesignMatrix& m);

// Two-stage least squares instrumenting endog with [instruments | exog].
// Endogenous columns identical to an instrument column are used as their
// own first-stage fit, so identical blocks reproduce OLS bit for bit.
IVEstimate tsls_fit(const DesignMatrix& m);

// Sandwich covariance for a different clustering of the same rows.
Eigen::MatrixXd cluster_cov(const IVEstimate& est, std::span<const int> clusters);

struct WaldResult {
  double F = 0.0;
  int df1 = 0;
  double df2 = 0.0;  // clusters - 1
  double p = 1.0;
};

WaldResult wald_joint(const IVEstimate& est, std::span<const std::size_t> subset);
WaldResult wald_joint(const IVEstimate& est, const std::vector<std::string>& names);

// F statistics are capped at this value (and flagged) when the first stage
// fits exactly.
inline constexpr double kFirstStageCap = 1e12;

struct FirstStageRow {
  std::string endogenous;
  double F = 0.0;
  int df1 = 0;
  double df2 = 0.0;
  double p = 1.0;
  double conditional_F = 0.0;  // Sanderson-Windmeijer
  int conditional_df1 = 0;
  double conditional_p = 1.0;
  bool capped = false;
};

struct FTestReport {
  std::vector<FirstStageRow> rows;
};

FTestReport first_stage_F(const DesignMatrix& m);

struct PeerGradient {
  Eigen::VectorXd identified;  // sum_l W_l lambda_l for the requested level, K-1 entries
  bool lambda_estimated = false;
  bool unidentified_offset = true;  // gamma + zeta part is never identified
};

// Gradient of predicted outcomes in peer fractions for teacher level w
// (0-based; 0 is the reference level). `x` is accepted for symmetry with the
// outcome equation: the identified part does not depend on it.
PeerGradient peer_gradient(const IVEstimate& est, int x, int w, int K);

}  // namespace tcr
