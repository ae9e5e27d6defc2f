#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sst/rng.hpp"

namespace {

using sst::Rng;

TEST(Rng, SameSeedSameSequence) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(Rng, DerivedStreamsDiffer) {
  EXPECT_NE(sst::derive_seed(1, "graph"), sst::derive_seed(1, "sat"));
  EXPECT_NE(sst::derive_seed(1, "graph"), sst::derive_seed(2, "graph"));
  EXPECT_EQ(sst::derive_seed(7, "mi"), sst::derive_seed(7, "mi"));
}

TEST(Rng, UniformRanges) {
  Rng r(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.uniform_open_closed();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(Rng, BelowIsUnbiased) {
  Rng r(5);
  std::vector<int> hist(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++hist[r.below(7)];
  // chi-square with 6 dof; 22.46 is the 0.999 quantile
  double chi = 0.0;
  for (int h : hist) chi += (h - n / 7.0) * (h - n / 7.0) / (n / 7.0);
  EXPECT_LT(chi, 22.46);
}

TEST(Rng, BetweenInclusive) {
  Rng r(9);
  bool lo = false, hi = false;
  for (int i = 0; i < 10000; ++i) {
    const auto v = r.between(3, 10);
    ASSERT_GE(v, 3);
    ASSERT_LE(v, 10);
    lo |= v == 3;
    hi |= v == 10;
  }
  EXPECT_TRUE(lo && hi);
}

TEST(Rng, ExponentialMean) {
  Rng r(11);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += r.exponential(7200.0);
  EXPECT_NEAR(sum / n, 7200.0, 0.01 * 7200.0);
}

TEST(Rng, WeightedIndexFollowsWeights) {
  Rng r(13);
  const std::vector<double> w{1.0, 0.0, 3.0};
  std::vector<int> hist(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hist[r.weighted_index(w)];
  EXPECT_EQ(hist[1], 0);
  EXPECT_NEAR(hist[2] / static_cast<double>(n), 0.75, 0.01);
}

}  // namespace
