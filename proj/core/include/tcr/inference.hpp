#pragma once

// Bayesian bootstrap: one standard exponential weight per teacher-classroom
// cluster, the statistic recomputed under those weights, B times.
// Replication b draws from Rng::for_stream(seed, b), so results do not
// depend on scheduling or thread count.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tcr/rng.hpp"

namespace tcr {

std::vector<double> draw_weights(std::size_t n_clusters, Rng& rng);

struct BootstrapConfig {
  std::size_t replications = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  double skip_alarm_share = 0.01;  // alarm when more than this share is skipped
};

// Returns one value per tracked statistic. Throwing NumericalError marks the
// replication as skipped (e.g. a rank-deficient weighted design).
using Statistic = std::function<std::vector<double>(std::span<const double> cluster_weights)>;

struct BootstrapResult {
  std::vector<std::string> names;
  std::vector<double> point;                // statistic at unit weights
  std::vector<std::vector<double>> draws;   // per replication; empty when skipped
  std::vector<std::size_t> skipped;
  std::vector<std::string> skip_reasons;
  bool alarm = false;

  std::size_t replications() const { return draws.size(); }
  std::vector<double> column(std::size_t stat) const;  // non-skipped draws of one statistic
};

BootstrapResult bootstrap_run(std::size_t n_clusters, std::vector<std::string> names, const Statistic& statistic,
                              const BootstrapConfig& config);

inline constexpr std::size_t kLowReplicationCount = 100;

struct PosteriorSummary {
  std::string name;
  double point = 0.0;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t draws = 0;
  bool degenerate = false;  // every draw identical
  bool low_b = false;       // fewer than kLowReplicationCount draws
};

// Centered draws d_b = theta_b - point; quantiles by linear interpolation
// between order statistics. SE = (q.975 - q.025) / (2 Phi^-1(.975)),
// interval [point - q.975, point - q.025]. Needs at least two draws.
PosteriorSummary posterior_se(std::span<const double> draws, double point);

std::vector<PosteriorSummary> summarize(const BootstrapResult& r);

}  // namespace tcr
