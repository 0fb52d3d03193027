#include <gtest/gtest.h>

#include <cmath>

#include "deepmusic/rng.hpp"

namespace dm {
namespace {

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox::generate({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out[0], 0x6627e8d5u);
  EXPECT_EQ(out[1], 0xe169c58du);
  EXPECT_EQ(out[2], 0xbc57ac4cu);
  EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                    {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out[0], 0x408f276du);
  EXPECT_EQ(out[1], 0x41c83b0eu);
  EXPECT_EQ(out[2], 0xa20bc7c6u);
  EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                    {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out[0], 0xd16cfe09u);
  EXPECT_EQ(out[1], 0x94fdccebu);
  EXPECT_EQ(out[2], 0x5001e420u);
  EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(Philox, StreamsAreDistinctAndReproducible) {
  Philox a(42, 0), b(42, 1), c(42, 0);
  int same = 0;
  for (int i = 0; i < 64; ++i) {
    const auto va = a(), vb = b(), vc = c();
    EXPECT_EQ(va, vc);
    same += va == vb;
  }
  EXPECT_LT(same, 2);
}

TEST(Philox, ComplexNormalMoments) {
  Philox rng(7);
  const int n = 200000;
  double power = 0.0, re_mean = 0.0, cross = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto z = rng.complex_normal(2.0);
    power += std::norm(z);
    re_mean += z.real();
    cross += z.real() * z.imag();
  }
  EXPECT_NEAR(power / n, 2.0, 0.02);
  EXPECT_NEAR(re_mean / n, 0.0, 0.01);
  EXPECT_NEAR(cross / n, 0.0, 0.01);
}

TEST(Philox, BelowIsInRange) {
  Philox rng(3);
  std::array<int, 5> hist{};
  for (int i = 0; i < 5000; ++i) ++hist[rng.below(5)];
  for (int h : hist) EXPECT_NEAR(h, 1000, 150);
}

}  // namespace
}  // namespace dm
