#pragma once

// Comma-separated report writers. Every file has one header row.

#include <filesystem>
#include <string>
#include <vector>

#include "tcr/diagnostics.hpp"
#include "tcr/estimator.hpp"
#include "tcr/inference.hpp"
#include "tcr/reallocation.hpp"

namespace tcr {

// "***" p < .01, "**" p < .05, "*" p < .10.
std::string significance_stars(double p);

// term, coef, se, t, p, stars; p from t with G-1 degrees of freedom.
void write_estimate_csv(const std::filesystem::path& path, const IVEstimate& est);

// Side-by-side layout: term, coef_ols, se_ols, coef_2sls, se_2sls, with a
// trailing block of n / clusters / r2 rows.
void write_comparison_csv(const std::filesystem::path& path, const IVEstimate& ols, const IVEstimate& tsls);

void write_first_stage_csv(const std::filesystem::path& path, const FTestReport& fs);

// One summary row per test.
void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<DiagnosticReport>& reports);
// test, regressor, estimate, se, tested.
void write_diagnostic_coefficients_csv(const std::filesystem::path& path,
                                       const std::vector<DiagnosticReport>& reports);

// cluster, teacher, cell, status_quo_level, optimal_level, worst_level.
void write_plans_csv(const std::filesystem::path& path, const ClassroomValueTable& table,
                     const ReallocationReport& rep);

// panel, subgroup, conditional, gain, students, reassigned, reassigned_fraction, weight, empty;
// followed by objective rows.
void write_effects_csv(const std::filesystem::path& path, const ReallocationReport& rep);

void write_posterior_csv(const std::filesystem::path& path, const std::vector<PosteriorSummary>& s);

// Long format: statistic, replication, value (skipped replications omitted).
void write_draws_csv(const std::filesystem::path& path, const BootstrapResult& r);

}  // namespace tcr
