#include <gtest/gtest.h>

#include <cmath>

#include "mflab/rng.hpp"

using namespace mflab;

TEST(Philox, KnownAnswerZero) {
  // Random123 kat_vectors: philox4x32 10 rounds, zero counter and key
  auto r = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(r[0], 0x6627e8d5u);
  EXPECT_EQ(r[1], 0xe169c58du);
  EXPECT_EQ(r[2], 0xbc57ac4cu);
  EXPECT_EQ(r[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  auto r = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                      {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(r[0], 0x408f276du);
  EXPECT_EQ(r[1], 0x41c83b0eu);
  EXPECT_EQ(r[2], 0xa20bc7c6u);
  EXPECT_EQ(r[3], 0x6d5451fdu);
}

TEST(Stream, SameKeySameSequence) {
  Stream a(42, {1, 2}), b(42, {1, 2});
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.normal(), b.normal());
}

TEST(Stream, DistinctPathsDiffer) {
  Stream a(42, {1, 2}), b(42, {2, 1});
  EXPECT_NE(a.key(), b.key());
  EXPECT_NE(a.uniform(), b.uniform());
}

TEST(Stream, NormalMoments) {
  Stream s(7);
  const int n = 200000;
  double m = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    double z = s.normal();
    m += z;
    m2 += z * z;
  }
  m /= n;
  m2 /= n;
  EXPECT_NEAR(m, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(m2, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Stream, UniformOpenInterval) {
  Stream s(0);
  for (int i = 0; i < 10000; ++i) {
    double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
