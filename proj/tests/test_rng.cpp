#include <gtest/gtest.h>

#include <set>
#include <vector>

#include "kpzlab/parallel.hpp"
#include "kpzlab/rng.hpp"

using namespace kpz;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  EXPECT_EQ(philox4x32(A4{0, 0, 0, 0}, A2{0, 0}),
            (A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, A2{0xffffffffu, 0xffffffffu}),
            (A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, A2{0xa4093822u, 0x299f31d0u}),
            (A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Stream, SameNameSameSequence) {
  Stream a(7, 3, 2), b(7, 3, 2);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Stream, DifferentNamesDiffer) {
  std::set<std::uint64_t> first;
  for (std::uint64_t seed : {1u, 2u}) {
    for (std::uint64_t index : {0u, 1u, 1u << 31}) {
      for (std::uint32_t ch : {0u, 1u, channel::row(channel::kWeights, 5)}) {
        Stream s(seed, index, ch);
        first.insert(s());
      }
    }
  }
  EXPECT_EQ(first.size(), 18u);
}

TEST(Stream, UniformRanges) {
  Stream s(11, 0, 0);
  double sum = 0.0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) {
    const double u = s.uniform();
    const double v = s.uniform_open();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    sum += u;
  }
  // Mean 1/2, sd 1/sqrt(12 m).
  EXPECT_NEAR(sum / m, 0.5, 5.0 / std::sqrt(12.0 * m));
}

TEST(Stream, NormalMoments) {
  Stream s(12, 0, 0);
  const int m = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x = s.normal();
    s1 += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s1 / m, 0.0, 5.0 / std::sqrt(double(m)));
  EXPECT_NEAR(s2 / m, 1.0, 5.0 * std::sqrt(2.0 / m));
}

TEST(Stream, ChannelRowPacking) {
  EXPECT_EQ(channel::row(channel::kBrownian, 0), channel::kRowStride);
  EXPECT_NE(channel::row(channel::kWeights, 1), channel::row(channel::kBrownian, 0));
}

TEST(ParallelFor, ResultsIndependentOfWorkers) {
  for (unsigned w : {1u, 2u, 5u}) {
    std::vector<std::uint64_t> out(100);
    parallel_for(out.size(), w, [&](std::size_t k) { out[k] = Stream(1, k, 0)(); });
    for (std::size_t k = 0; k < out.size(); ++k) ASSERT_EQ(out[k], Stream(1, k, 0)());
  }
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  try {
    parallel_for(50, 4, [](std::size_t k) {
      if (k == 17 || k == 40) throw std::runtime_error(std::to_string(k));
    });
    FAIL() << "no exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "17");
  }
}
