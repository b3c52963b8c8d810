#include "nonclip/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using nonclip::Rng;

// Vectors computed with an independent Python implementation (docs/rng.md).
TEST(Rng, MixVectors) {
  EXPECT_EQ(Rng::mix(0), 0x0ULL);
  EXPECT_EQ(Rng::mix(1), 0x5692161d100b05e5ULL);
  EXPECT_EQ(Rng::mix(0x0123456789ABCDEFULL), 0xb2c058e4ebb5112cULL);
}

TEST(Rng, StreamVectors) {
  Rng a(0);
  EXPECT_EQ(a.next_u64(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(a.next_u64(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(a.next_u64(), 0x06c45d188009454fULL);
  EXPECT_EQ(a.next_u64(), 0xf88bb8a8724c81ecULL);
  Rng b(42);
  EXPECT_EQ(b.next_u64(), 0xbdd732262feb6e95ULL);
  EXPECT_EQ(b.next_u64(), 0x28efe333b266f103ULL);
  EXPECT_EQ(b.next_u64(), 0x47526757130f9f52ULL);
  EXPECT_EQ(b.counter(), 3u);
}

TEST(Rng, UniformAndNormalVectors) {
  Rng u(7);
  EXPECT_DOUBLE_EQ(u.uniform(), 0.3898297483912715);
  EXPECT_DOUBLE_EQ(u.uniform(), 0.01678829452815611);
  EXPECT_DOUBLE_EQ(u.uniform(), 0.9007606806068834);
  Rng n(7);
  EXPECT_NEAR(n.normal(), 1.3649922974572282, 1e-15);
  EXPECT_NEAR(n.normal(), -0.39652397525381783, 1e-15);
  EXPECT_NEAR(n.normal(), 0.004498526159832091, 1e-15);
  EXPECT_EQ(n.counter(), 6u);
}

TEST(Rng, BelowAndSplitVectors) {
  Rng r(9);
  const std::vector<std::uint64_t> expected{6, 7, 2, 7, 2, 1, 6, 9};
  for (auto e : expected) EXPECT_EQ(r.below(10), e);
  EXPECT_EQ(Rng(5).split(3).key(), 0x9bae44e0d400bf87ULL);
  EXPECT_EQ(Rng(5).split(10).key(), 0xdee8fb6515b691d5ULL);
}

TEST(Rng, SplitDoesNotAdvanceParent) {
  Rng r(11);
  const Rng child = r.split(1);
  EXPECT_EQ(r.counter(), 0u);
  EXPECT_NE(child.key(), r.key());
  EXPECT_NE(r.split(1).key(), r.split(2).key());
}

TEST(Rng, UniformOpenNeverZero) {
  Rng r(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform_open();
    EXPECT_GT(u, 0.0);
    EXPECT_LE(u, 1.0);
  }
}

TEST(Rng, NormalMoments) {
  Rng r(123);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}
