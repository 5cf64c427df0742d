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

#pragma once

#include <cstdint>
#include <vector>

namespace acpa::net {

/// Receiver-side counters. Latency fields compare the receiver clock with the
/// sender's timestamp_us and are only meaningful when both run on the same
/// host (shared monotonic clock); there is no clock synchronisation.
struct ReceiverStats {
  std::uint64_t received = 0;
  std::uint64_t lost = 0;
  std::uint64_t reordered = 0;
  std::uint64_t duplicated = 0;
  std::uint64_t malformed = 0;          // datagrams that failed to parse
  std::uint64_t overflow_dropped = 0;   // packets evicted from a full consumer queue
  std::uint64_t samples = 0;
  double latency_mean_us = 0.0;
  double latency_max_us = 0.0;
  std::uint64_t highest_seq = 0;
  bool any = false;
};

/// Loss/reorder/duplicate accounting over packet sequence numbers.
///
/// A jump from the highest sequence seen so far to `seq` counts the skipped
/// numbers as lost. A late arrival below the highest seen counts as reordered
/// and takes back its earlier loss; a repeat counts as duplicated.
class SequenceTracker {
 public:
  explicit SequenceTracker(std::uint32_t first_expected = 0) : base_(first_expected) {}

  enum class Outcome { InOrder, Gap, Reordered, Duplicate };

  Outcome observe(std::uint32_t seq);

  /// Counts sequence numbers after the highest one seen as lost, given the
  /// total the sender reports having sent.
  void finalize(std::uint64_t packets_sent);

  std::uint64_t received() const noexcept { return received_; }
  std::uint64_t lost() const noexcept { return lost_; }
  std::uint64_t reordered() const noexcept { return reordered_; }
  std::uint64_t duplicated() const noexcept { return duplicated_; }
  /// Highest sequence observed; only meaningful after the first observe().
  std::uint64_t highest() const noexcept { return next_ - 1 + base_; }
  bool any() const noexcept { return next_ > 0; }

 private:
  std::uint32_t base_;
  std::uint64_t next_ = 0;  // one past the highest offset seen
  std::vector<bool> seen_;
  std::uint64_t received_ = 0, lost_ = 0, reordered_ = 0, duplicated_ = 0;
};

}  // namespace acpa::net
