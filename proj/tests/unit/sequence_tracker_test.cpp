// Copyright 2026 The ACPA-EEG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "acpa/net/sequence_tracker.hpp"

namespace {

using acpa::net::SequenceTracker;

struct Score {
  std::uint64_t lost = 0, reordered = 0, duplicated = 0;
};

// Reference: lost = sent seqs that never arrived; reordered = first arrivals
// of a seq after some higher seq already arrived; duplicated = repeats.
Score brute_force(const std::vector<std::uint32_t>& arrivals, std::uint64_t sent) {
  Score s;
  std::set<std::uint32_t> seen;
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    const std::uint32_t q = arrivals[i];
    if (seen.count(q)) {
      ++s.duplicated;
      continue;
    }
    bool late = false;
    for (std::size_t j = 0; j < i; ++j) late = late || arrivals[j] > q;
    if (late) ++s.reordered;
    seen.insert(q);
  }
  for (std::uint64_t q = 0; q < sent; ++q) s.lost += seen.count(static_cast<std::uint32_t>(q)) ? 0 : 1;
  return s;
}

Score track(const std::vector<std::uint32_t>& arrivals, std::uint64_t sent) {
  SequenceTracker t;
  for (std::uint32_t q : arrivals) t.observe(q);
  t.finalize(sent);
  return {t.lost(), t.reordered(), t.duplicated()};
}

TEST(SequenceTracker, InOrder) {
  std::vector<std::uint32_t> a(10);
  std::iota(a.begin(), a.end(), 0u);
  const Score s = track(a, 10);
  EXPECT_EQ(s.lost, 0u);
  EXPECT_EQ(s.reordered, 0u);
}

TEST(SequenceTracker, GapCountsAsLost) {
  SequenceTracker t;
  EXPECT_EQ(t.observe(0), SequenceTracker::Outcome::InOrder);
  EXPECT_EQ(t.observe(1), SequenceTracker::Outcome::InOrder);
  EXPECT_EQ(t.observe(3), SequenceTracker::Outcome::Gap);
  EXPECT_EQ(t.observe(4), SequenceTracker::Outcome::InOrder);
  EXPECT_EQ(t.lost(), 1u);
  EXPECT_EQ(t.highest(), 4u);
}

TEST(SequenceTracker, LateArrivalSettlesLoss) {
  SequenceTracker t;
  t.observe(0);
  t.observe(2);
  EXPECT_EQ(t.lost(), 1u);
  EXPECT_EQ(t.observe(1), SequenceTracker::Outcome::Reordered);
  EXPECT_EQ(t.lost(), 0u);
  EXPECT_EQ(t.reordered(), 1u);
  EXPECT_EQ(t.observe(1), SequenceTracker::Outcome::Duplicate);
  EXPECT_EQ(t.duplicated(), 1u);
}

TEST(SequenceTracker, FinalizeCountsTail) {
  SequenceTracker t;
  t.observe(0);
  t.observe(1);
  t.finalize(5);
  EXPECT_EQ(t.lost(), 3u);
}

TEST(SequenceTracker, MatchesBruteForceOnRandomScenarios) {
  std::mt19937_64 rng(20260417);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::uint32_t n = 1 + static_cast<std::uint32_t>(rng() % 60);
    std::vector<std::uint32_t> a(n);
    std::iota(a.begin(), a.end(), 0u);
    const double p_del = std::uniform_real_distribution<double>(0.0, 0.5)(rng);
    std::bernoulli_distribution del(p_del), dup(0.05);
    std::vector<std::uint32_t> kept;
    for (std::uint32_t q : a)
      if (!del(rng)) kept.push_back(q);
    // Local reordering: swap random nearby pairs.
    for (std::size_t i = 0; i + 1 < kept.size(); ++i)
      if (rng() % 4 == 0) std::swap(kept[i], kept[std::min(kept.size() - 1, i + 1 + rng() % 4)]);
    std::vector<std::uint32_t> arrivals;
    for (std::uint32_t q : kept) {
      arrivals.push_back(q);
      if (dup(rng)) arrivals.push_back(q);
    }
    const Score ref = brute_force(arrivals, n);
    const Score got = track(arrivals, n);
    ASSERT_EQ(got.lost, ref.lost) << "trial " << trial;
    ASSERT_EQ(got.reordered, ref.reordered) << "trial " << trial;
    ASSERT_EQ(got.duplicated, ref.duplicated) << "trial " << trial;
  }
}

}  // namespace
