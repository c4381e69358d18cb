#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "tcr/rng.hpp"
#include "tcr/stats.hpp"

using namespace tcr;

TEST(Rng, SameSeedSameSequence) {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsArePureFunctionsOfSeedAndIndex) {
  auto a = Rng::for_stream(5, 17), b = Rng::for_stream(5, 17), c = Rng::for_stream(5, 18);
  const auto x = a.uniform();
  EXPECT_EQ(x, b.uniform());
  EXPECT_NE(x, c.uniform());
}

TEST(Rng, MomentsOfTransforms) {
  Rng r(1);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, se = 0, sg = 0, sb = 0;
  for (int i = 0; i < n; ++i) {
    su += r.uniform();
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
    se += r.exponential();
    sg += r.gamma(2.5);
    sb += r.beta(2.0, 6.0);
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.01);
  EXPECT_NEAR(se / n, 1.0, 0.01);
  EXPECT_NEAR(sg / n, 2.5, 0.02);
  EXPECT_NEAR(sb / n, 0.25, 0.003);
}

TEST(Rng, GammaBelowOneHasCorrectMean) {
  Rng r(3);
  double s = 0;
  for (int i = 0; i < 100000; ++i) s += r.gamma(0.4);
  EXPECT_NEAR(s / 100000, 0.4, 0.01);
}

TEST(Rng, BelowAndUniformIntStayInRange) {
  Rng r(4);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto b = r.below(7);
    ASSERT_LT(b, 7u);
    ++hits[b];
    const int u = r.uniform_int(-2, 2);
    ASSERT_GE(u, -2);
    ASSERT_LE(u, 2);
  }
  for (int h : hits) EXPECT_NEAR(h, 10000, 400);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng r(8);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  r.shuffle(w.begin(), w.end());
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(Stats, NormalFunctionsAgreeWithBoost) {
  boost::math::normal_distribution<> N;
  for (double x : {-5.0, -1.96, -0.3, 0.0, 0.7, 2.5, 6.0}) {
    EXPECT_NEAR(stats::normal_pdf(x), boost::math::pdf(N, x), 1e-15);
    EXPECT_NEAR(stats::normal_cdf(x), boost::math::cdf(N, x), 1e-15);
  }
  for (double p : {1e-10, 0.001, 0.025, 0.05, 0.3, 0.5, 0.8, 0.975, 0.999999})
    EXPECT_NEAR(stats::normal_quantile(p), boost::math::quantile(N, p), 1e-12 * (1 + std::abs(boost::math::quantile(N, p))));
  EXPECT_NEAR(stats::normal_quantile(0.975), 1.959963984540054, 1e-14);
}

TEST(Stats, FAndTTailsAgreeWithBoost) {
  for (auto [f, d1, d2] : {std::tuple{1.5, 3.0, 239.0}, {0.2, 6.0, 50.0}, {12.0, 2.0, 10.0}, {3.0, 1.0, 1000.0}}) {
    boost::math::fisher_f_distribution<> F(d1, d2);
    EXPECT_NEAR(stats::f_upper_tail(f, d1, d2), boost::math::cdf(boost::math::complement(F, f)), 1e-12);
  }
  EXPECT_EQ(stats::f_upper_tail(INFINITY, 2, 10), 0.0);
  for (auto [t, df] : {std::pair{2.1, 10.0}, {-0.5, 239.0}, {4.0, 3.0}}) {
    boost::math::students_t_distribution<> T(df);
    EXPECT_NEAR(stats::t_two_sided(t, df), 2 * boost::math::cdf(boost::math::complement(T, std::abs(t))), 1e-12);
  }
}

TEST(Stats, QuantileInterpolatesBetweenOrderStatistics) {
  const std::vector<double> x{1, 2, 4, 8};
  // h = (n - 1) p
  EXPECT_DOUBLE_EQ(stats::quantile_sorted(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(stats::quantile_sorted(x, 1.0), 8.0);
  EXPECT_DOUBLE_EQ(stats::quantile_sorted(x, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(stats::quantile_sorted(x, 0.25), 1.75);
}

TEST(Stats, MeanSdAndKs) {
  const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(stats::mean(x), 5.0);
  EXPECT_NEAR(stats::sample_sd(x), std::sqrt(32.0 / 7.0), 1e-14);
  EXPECT_NEAR(stats::ks_uniform_distance({0.5}), 0.5, 1e-15);
  std::vector<double> grid;
  for (int i = 0; i < 1000; ++i) grid.push_back((i + 0.5) / 1000);
  EXPECT_LT(stats::ks_uniform_distance(grid), 0.001);
}
