#include "tcr/inference.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "tcr/error.hpp"
#include "tcr/stats.hpp"

namespace tcr {

std::vector<double> draw_weights(std::size_t n_clusters, Rng& rng) {
  std::vector<double> w(n_clusters);
  for (auto& x : w) {
    do {
      x = rng.exponential();
    } while (!(x > 0.0));
  }
  return w;
}

std::vector<double> BootstrapResult::column(std::size_t stat) const {
  std::vector<double> out;
  for (const auto& d : draws)
    if (!d.empty()) out.push_back(d[stat]);
  return out;
}

BootstrapResult bootstrap_run(std::size_t n_clusters, std::vector<std::string> names, const Statistic& statistic,
                              const BootstrapConfig& config) {
  if (config.replications < 2) throw InvalidInput("bootstrap needs at least two replications");
  if (n_clusters < 1) throw InvalidInput("bootstrap needs at least one cluster");
  BootstrapResult res;
  res.names = std::move(names);
  const std::vector<double> ones(n_clusters, 1.0);
  res.point = statistic(ones);
  if (res.point.size() != res.names.size()) throw InvalidInput("statistic returned the wrong number of values");

  const auto B = config.replications;
  res.draws.assign(B, {});
  std::vector<std::string> reasons(B);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const auto b = next.fetch_add(1);
      if (b >= B) return;
      try {
        Rng rng = Rng::for_stream(config.seed, b);
        const auto w = draw_weights(n_clusters, rng);
        auto v = statistic(w);
        if (v.size() != res.names.size()) throw InvalidInput("statistic returned the wrong number of values");
        res.draws[b] = std::move(v);
      } catch (const NumericalError& e) {
        reasons[b] = e.what();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
        next = B;
      }
    }
  };
  const unsigned threads = std::max(1u, config.threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (std::size_t b = 0; b < B; ++b)
    if (res.draws[b].empty()) {
      res.skipped.push_back(b);
      res.skip_reasons.push_back(reasons[b]);
    }
  res.alarm = static_cast<double>(res.skipped.size()) > config.skip_alarm_share * static_cast<double>(B);
  return res;
}

PosteriorSummary posterior_se(std::span<const double> draws, double point) {
  if (draws.size() < 2) throw InvalidInput("posterior summary needs at least two draws");
  std::vector<double> c(draws.begin(), draws.end());
  for (auto& x : c) x -= point;
  std::sort(c.begin(), c.end());
  PosteriorSummary s;
  s.point = point;
  s.draws = draws.size();
  s.low_b = draws.size() < kLowReplicationCount;
  s.degenerate = std::all_of(draws.begin(), draws.end(), [&](double v) { return v == draws[0]; });
  if (s.degenerate) {
    s.se = 0.0;
    s.lower = s.upper = point - c.front();
    return s;
  }
  const double lo = stats::quantile_sorted(c, 0.025);
  const double hi = stats::quantile_sorted(c, 0.975);
  s.se = (hi - lo) / (2.0 * stats::normal_quantile(0.975));
  s.lower = point - hi;
  s.upper = point - lo;
  return s;
}

std::vector<PosteriorSummary> summarize(const BootstrapResult& r) {
  std::vector<PosteriorSummary> out;
  for (std::size_t j = 0; j < r.names.size(); ++j) {
    const auto col = r.column(j);
    if (col.size() < 2) throw NumericalError("fewer than two successful replications for " + r.names[j]);
    auto s = posterior_se(col, r.point[j]);
    s.name = r.names[j];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tcr
