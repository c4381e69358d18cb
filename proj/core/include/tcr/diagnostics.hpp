#pragma once

// Randomization balance, the two indirect non-compliance checks and the
// direct peer restriction test. Each is an OLS fit with absorbed block
// effects and a cluster-robust joint Wald test; none reads latent columns.

#include <string>
#include <vector>

#include "tcr/dataset.hpp"
#include "tcr/discretize.hpp"
#include "tcr/estimator.hpp"

namespace tcr {

struct DiagnosticReport {
  std::string test;
  std::string dependent;
  std::vector<std::string> regressors;
  std::vector<std::string> tested;
  std::vector<double> estimates;  // aligned with `regressors`
  std::vector<double> std_errors;
  double F = 0.0;
  int df1 = 0;
  double df2 = 0.0;
  double p = 1.0;
  double level = 0.05;
  bool reject = false;
  bool degenerate = false;  // dependent variable (or its residual) identically zero
  bool skipped = false;
  std::string notice;
  std::size_t n_obs = 0;
};

struct DiagnosticOptions {
  double level = 0.05;
};

// Assigned teacher practice score on student covariates. `covariates` names
// "baseline" or student auxiliary attributes; empty means all of them.
DiagnosticReport balance_test(const Dataset& ds, std::vector<std::string> covariates = {},
                              const DiagnosticOptions& opt = {});

// (realized - assigned) teacher attribute on X, W*, Xbar*.
DiagnosticReport assumption1_test(const Dataset& ds, const CategorySpec& spec, const std::string& teacher_attribute,
                                  const DiagnosticOptions& opt = {});

// (realized - assigned) peer mean of a student attribute on X, Xbar* and the
// tested W*. `student_attribute` is "baseline" or an auxiliary name.
DiagnosticReport assumption2_test(const Dataset& ds, const CategorySpec& spec, const std::string& student_attribute,
                                  const DiagnosticOptions& opt = {});

// Realized peer mean baseline on own baseline, assigned peer mean baseline
// and the tested W*.
DiagnosticReport restriction_test(const Dataset& ds, const CategorySpec& spec, const DiagnosticOptions& opt = {});

// Everything at once: balance, assumption 1 for every teacher attribute,
// assumption 2 for baseline and every student attribute, restriction.
std::vector<DiagnosticReport> run_all_diagnostics(const Dataset& ds, const CategorySpec& spec,
                                                  const DiagnosticOptions& opt = {});

}  // namespace tcr
