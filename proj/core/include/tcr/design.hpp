#pragma once

// Estimator matrices for the partially linear IV equation:
//   y on [endogenous | exogenous], instrumenting with [instruments | exogenous]
//   endogenous  W | X(x)W | W(x)Xbar          (realized teacher, realized peers)
//   exogenous   1 | X | Xbar* | X(x)Xbar*     (assigned peers)
//   instruments W* | X(x)W* | W*(x)Xbar*      (assigned teacher, assigned peers)
// Column names: "W[l]", "X[k]xW[l]", "W[l]xXbar[k]", "const", "X[k]",
// "Xbar*[k]", "X[k]xXbar*[j]", with starred W for instruments.

#include <Eigen/Dense>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tcr/dataset.hpp"
#include "tcr/discretize.hpp"

namespace tcr {

struct Discretization {
  int K = 0;
  int L = 0;
  std::vector<int> student_type;   // per student row
  std::vector<int> teacher_level;  // per teacher
  std::map<int, std::vector<double>> district_cuts;
  std::string quantile_rule;
};

Discretization discretize(const Dataset& ds, const CategorySpec& spec);

enum class TeacherMeasure {
  levels,      // L-1 dummies from the cutoffs
  continuous,  // the practice score itself, one column named "FFT"
};

struct DesignOptions {
  bool include_lambda = false;
  bool include_eta = true;
  TeacherMeasure teacher = TeacherMeasure::levels;
};

struct DesignMetadata {
  int K = 0;
  int L = 0;
  bool include_lambda = false;
  std::vector<std::string> warnings;
  std::vector<std::string> dropped_columns;
  std::size_t excluded_students = 0;
  std::string quantile_rule;
  std::map<int, std::vector<double>> district_cuts;
  std::size_t absorbed_blocks = 0;
};

struct DesignMatrix {
  Eigen::VectorXd y;
  Eigen::MatrixXd endog;
  Eigen::MatrixXd exog;
  Eigen::MatrixXd instruments;
  std::vector<std::string> endog_names;
  std::vector<std::string> exog_names;
  std::vector<std::string> instrument_names;
  std::vector<int> cluster;       // covariance clusters (randomization block by default)
  std::vector<int> block;         // fixed-effect groups
  Eigen::VectorXd weights;        // analytic weights, 1 by default
  std::vector<std::size_t> rows;  // student row in the source dataset
  bool absorbed = false;
  DesignMetadata meta;

  std::size_t n() const { return static_cast<std::size_t>(y.size()); }
  void check_shapes() const;  // throws InvalidInput on inconsistent blocks
};

// Students enter the sample when both their realized and assigned sections
// hold at least two students; others are counted in metadata.
DesignMatrix build_design(const Dataset& ds, const CategorySpec& spec, const DesignOptions& options = {});

// Same, reusing a discretization computed once.
DesignMatrix build_design(const Dataset& ds, const Discretization& disc, const CategorySpec& spec,
                          const DesignOptions& options = {});

// Weighted within-block demeaning of every column. Blocks with one row are
// dropped, the constant is removed, and columns that vanish after demeaning
// are dropped; each event is recorded as a warning.
DesignMatrix absorb_blocks(const DesignMatrix& m);

// Explicit block-dummy equivalent of absorb_blocks (for cross-checks): one
// indicator per block except the first, appended to the exogenous block.
DesignMatrix add_block_dummies(const DesignMatrix& m);

// Minimal exogenous-only design used by regression diagnostics.
DesignMatrix regression_design(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors,
                               const std::vector<std::string>& names, const std::vector<int>& block);

// One header row, one line per observation: y, weight, cluster, then all
// column blocks with their names.
void write_design_csv(const DesignMatrix& m, const std::filesystem::path& path);

// Column-name helpers shared with prediction code.
std::string w_name(int l, bool assigned = false);
std::string xw_name(int k, int l, bool assigned = false);
std::string wxbar_name(int l, int k, bool assigned = false);

}  // namespace tcr
