#include "tcr/vam.hpp"

#include <cmath>

#include "tcr/error.hpp"
#include "tcr/stats.hpp"

namespace tcr {

void VamPolicy::validate() const {
  if (!(sigma > 0) || !std::isfinite(sigma)) throw InvalidInput("sigma must be positive");
  if (!(tau > 0 && tau < 1)) throw InvalidInput("tau must lie in (0, 1)");
  if (tau_tilde && !(*tau_tilde > 0 && *tau_tilde < 1)) throw InvalidInput("tau_tilde must lie in (0, 1)");
}

double vam_benchmark(const VamPolicy& p) {
  p.validate();
  // E[-VA | VA below its tau quantile] * tau = sigma * phi(Phi^-1(tau))
  double gain = p.sigma * stats::normal_pdf(stats::normal_quantile(p.tau));
  if (p.tau_tilde) gain += p.tau * p.sigma * stats::normal_quantile(*p.tau_tilde);
  return gain;
}

}  // namespace tcr
