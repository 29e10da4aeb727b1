#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "scenezsl/parallel.hpp"
#include "scenezsl/rng.hpp"

namespace scenezsl {
namespace {

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, StreamStartsAtCounterZero) {
  Philox rng(0);
  const auto first = Philox::block({0, 0, 0, 0}, {0, 0});
  for (auto word : first) EXPECT_EQ(rng.next_u32(), word);
  EXPECT_EQ(rng.position(), 4u);
}

TEST(Philox, SameSeedSameStream) {
  Philox a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differs |= x != c();
  }
  EXPECT_TRUE(differs);
}

TEST(Philox, UniformInUnitInterval) {
  Philox rng(7);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  // Mean of U(0,1) has sd 1/sqrt(12 n); allow 5 sd.
  EXPECT_NEAR(sum / n, 0.5, 5.0 / std::sqrt(12.0 * n));
}

TEST(Philox, BelowCoversRangeEvenly) {
  Philox rng(9);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = rng.below(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 5.0 * std::sqrt(n * (1.0 / 7) * (6.0 / 7)));
}

TEST(Philox, NormalMoments) {
  Philox rng(11);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s1 += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(DeriveSeed, PathSensitive) {
  EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(1, {2, 0}));
  EXPECT_NE(derive_seed(1, {2}), derive_seed(2, {2}));
  static_assert(derive_seed(5, {1}) == derive_seed(5, {1}));
}

TEST(Shuffle, IsPermutationAndDeterministic) {
  std::vector<int> a(50), b(50);
  std::iota(a.begin(), a.end(), 0);
  b = a;
  Philox r1(3), r2(3);
  shuffle(a.begin(), a.end(), r1);
  shuffle(b.begin(), b.end(), r2);
  EXPECT_EQ(a, b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(ParallelFor, ChunksAreStableAndComplete) {
  std::vector<int> hits(103, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);

  std::vector<std::pair<std::size_t, std::size_t>> ranges(3);
  const auto used = parallel_chunks(10, 3, [&](std::size_t t, std::size_t b, std::size_t e) { ranges[t] = {b, e}; });
  EXPECT_EQ(used, 3u);
  EXPECT_EQ(ranges[0], (std::pair<std::size_t, std::size_t>{0, 3}));
  EXPECT_EQ(ranges[1], (std::pair<std::size_t, std::size_t>{3, 6}));
  EXPECT_EQ(ranges[2], (std::pair<std::size_t, std::size_t>{6, 10}));
}

TEST(ParallelFor, RethrowsWorkerException) {
  EXPECT_THROW(parallel_for(8, 2, [](std::size_t i) {
                 if (i == 5) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

}  // namespace
}  // namespace scenezsl
