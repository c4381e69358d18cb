#pragma once

#include <span>
#include <vector>

namespace tcr::stats {

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

// Upper tail Pr(F(df1, df2) > f). Infinite f maps to 0.
double f_upper_tail(double f, double df1, double df2);

// Two-sided p-value for a t statistic with df degrees of freedom.
double t_two_sided(double t, double df);

// Sample quantile by linear interpolation between order statistics
// (h = (n - 1) p; Hyndman-Fan type 7). `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double p);

double mean(std::span<const double> x);
double sample_sd(std::span<const double> x);

// Kolmogorov-Smirnov distance between the empirical CDF of `p` and U(0,1).
double ks_uniform_distance(std::vector<double> p);

}  // namespace tcr::stats
