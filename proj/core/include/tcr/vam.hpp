#pragma once

#include <optional>

namespace tcr {

// Replacing the bottom tau share of a N(0, sigma^2) value-added distribution.
//  - without tau_tilde, replacements are average (zero) teachers and the
//    mean gain is sigma * phi(Phi^-1(tau));
//  - with tau_tilde, replacements sit at quantile tau_tilde, adding
//    tau * sigma * Phi^-1(tau_tilde).
struct VamPolicy {
  double sigma = 0.15;
  double tau = 0.05;
  std::optional<double> tau_tilde;

  void validate() const;  // throws InvalidInput
};

double vam_benchmark(const VamPolicy& policy);

}  // namespace tcr
