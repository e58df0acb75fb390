/*
 * Copyright (c) 2026 The geomatch Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "geomatch/benchgen.hpp"
#include "geomatch/rng.hpp"

namespace geomatch {
namespace {

TEST(Rng, SplitMixReferenceValues) {
  // Reference SplitMix64 stream seeded with 0 (state advanced before mixing).
  CounterRng rng(0);
  EXPECT_EQ(rng.next_u64(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.next_u64(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng.next_u64(), 0x06c45d188009454fULL);
}

TEST(Rng, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Rng, SubstreamsAreIndependentOfParentPosition) {
  CounterRng a(42);
  CounterRng b(42);
  b.next_u64();
  EXPECT_EQ(a.substream("x").next_u64(), b.substream("x").next_u64());
  EXPECT_NE(a.substream("x").next_u64(), a.substream("y").next_u64());
  EXPECT_NE(a.substream(std::uint64_t{1}).next_u64(), a.substream(std::uint64_t{2}).next_u64());
}

TEST(Rng, UniformAndBoundedRanges) {
  CounterRng rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ++counts[rng.bounded(7)];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, NormalMoments) {
  CounterRng rng(4);
  const int n = 200000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  CounterRng c(4);
  c.normal();
  EXPECT_EQ(c.counter(), 2u);
}

TEST(SampleDistinct, DistinctInRangeAndDeterministic) {
  for (std::uint64_t n : {1ULL, 5ULL, 100ULL, 100000ULL}) {
    for (std::uint64_t k : {0ULL, 1ULL, 3ULL, 5ULL}) {
      if (k > n) continue;
      CounterRng a(n * 31 + k);
      CounterRng b(n * 31 + k);
      const auto s = sample_distinct(n, k, a);
      EXPECT_EQ(s, sample_distinct(n, k, b));
      ASSERT_EQ(s.size(), k);
      std::set<std::uint64_t> unique(s.begin(), s.end());
      EXPECT_EQ(unique.size(), k);
      for (auto v : s) EXPECT_LT(v, n);
    }
  }
  CounterRng rng(1);
  EXPECT_EQ(sample_distinct(3, 4, rng), (std::vector<std::uint64_t>{0, 1, 2}));
}

TEST(SampleDistinct, RoughlyUniform) {
  std::vector<int> hits(10, 0);
  for (int t = 0; t < 20000; ++t) {
    CounterRng rng(static_cast<std::uint64_t>(t));
    for (auto v : sample_distinct(10, 3, rng)) ++hits[v];
  }
  for (int h : hits) EXPECT_NEAR(h, 6000, 300);
}

}  // namespace
}  // namespace geomatch
