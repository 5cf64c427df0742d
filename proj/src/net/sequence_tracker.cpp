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

#include "acpa/net/sequence_tracker.hpp"

namespace acpa::net {

SequenceTracker::Outcome SequenceTracker::observe(std::uint32_t seq) {
  // Offsets are relative to the first expected sequence number; anything
  // "below" it wraps to a huge offset and is treated as a forward jump.
  const std::uint64_t off = static_cast<std::uint32_t>(seq - base_);
  if (off >= next_) {
    const std::uint64_t gap = off - next_;
    lost_ += gap;
    next_ = off + 1;
    if (seen_.size() < next_) seen_.resize(next_, false);
    seen_[off] = true;
    ++received_;
    return gap == 0 ? Outcome::InOrder : Outcome::Gap;
  }
  if (seen_[off]) {
    ++duplicated_;
    return Outcome::Duplicate;
  }
  seen_[off] = true;
  ++received_;
  ++reordered_;
  if (lost_ > 0) --lost_;
  return Outcome::Reordered;
}

void SequenceTracker::finalize(std::uint64_t packets_sent) {
  if (packets_sent > next_) {
    lost_ += packets_sent - next_;
    next_ = packets_sent;
    seen_.resize(next_, false);
  }
}

}  // namespace acpa::net
