#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "bwmr/rng.hpp"

using namespace bwmr;

TEST(Philox, KnownAnswerVectors) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, DeterministicAndStreamSeparated) {
  Rng a(42), b(42), c(42, 1), d(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
    EXPECT_NE(x, d.next_u64());
  }
  const Rng base(9);
  Rng s1 = base.substream(1), s1b = base.substream(1), s2 = base.substream(2);
  EXPECT_EQ(s1.next_u64(), s1b.next_u64());
  EXPECT_NE(s1.next_u64(), s2.next_u64());
}

TEST(Rng, ReplicateSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t seed : {0ull, 1ull, 2ull})
    for (std::uint64_t r = 0; r < 1000; ++r) seen.insert(replicate_seed(seed, r));
  EXPECT_EQ(seen.size(), 3000u);
  EXPECT_EQ(replicate_seed(1, 5), mix64(1 ^ mix64(5 + 0x9E3779B97F4A7C15ULL)));
}

TEST(Rng, UniformMoments) {
  Rng r(1);
  double s = 0, s2 = 0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.uniform_open();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 0.003);
  EXPECT_NEAR(s2 / n - 0.25, 1.0 / 12.0, 0.002);
}

TEST(Rng, NormalMoments) {
  Rng r(2);
  double s = 0, s2 = 0, s4 = 0;
  const int n = 400000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.006);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
  EXPECT_NEAR(s4 / n, 3.0, 0.06);
}

TEST(Rng, LaplaceVariance) {
  for (double rate : {0.5, 1.0, 3.0}) {
    Rng r(3);
    double s = 0, s2 = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      const double x = r.laplace(rate);
      s += x;
      s2 += x * x;
    }
    const double var = s2 / n - (s / n) * (s / n);
    EXPECT_NEAR(var / (2.0 / (rate * rate)), 1.0, 0.01) << rate;
  }
}

TEST(Rng, Binomial2Moments) {
  Rng r(4);
  const double p = 0.3;
  std::vector<int> counts(3, 0);
  const int n = 300000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(r.binomial2(p))];
  EXPECT_NEAR(counts[0] / double(n), 0.49, 0.004);
  EXPECT_NEAR(counts[1] / double(n), 0.42, 0.004);
  EXPECT_NEAR(counts[2] / double(n), 0.09, 0.003);
}
