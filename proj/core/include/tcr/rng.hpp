#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>

namespace tcr {

/// Seedable random source with a fixed, documented algorithm.
///
/// The engine is `std::mt19937_64`, whose output sequence is pinned by the
/// C++ standard. The variate transforms below are implemented here rather
/// than taken from `<random>` distributions, whose algorithms are
/// implementation-defined:
///
///  - uniform():      top 53 bits of one engine draw, scaled to [0, 1)
///  - normal():       Marsaglia polar method, second variate cached
///  - exponential():  -log(1 - U)
///  - gamma(a):       Marsaglia-Tsang squeeze (a >= 1), boosted for a < 1
///  - beta(a, b):     X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b)
///  - below(n):       Lemire-style rejection on 64-bit draws
///
/// Independent streams are derived by `for_stream(seed, index)`, which seeds
/// the engine with splitmix64(seed ^ splitmix64(index + 1)). Stream `b` is a
/// pure function of (seed, b), so replications can run in any order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng for_stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double exponential();
  double gamma(double shape);
  double beta(double a, double b);
  std::size_t below(std::size_t n);
  int uniform_int(int lo, int hi);  // inclusive bounds
  bool bernoulli(double p) { return uniform() < p; }

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) {
      using std::swap;
      swap(first[i - 1], first[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace tcr
