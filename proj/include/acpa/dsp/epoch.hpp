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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "acpa/common/signal.hpp"

namespace acpa::dsp {

struct Epoch {
  MultiChannel data;  // 8 x L, filtered uV
  std::uint8_t label = kUnlabeled;
  std::size_t origin = 0;  // first sample within the session
};

struct EventMark {
  std::size_t sample = 0;
  std::uint8_t label = kUnlabeled;
};

struct Segmentation {
  std::vector<Epoch> epochs;
  std::vector<EventMark> skipped;  // windows running past the end of the signal
};

/// One epoch per event; overlapping windows are allowed.
Segmentation segment_epochs(const MultiChannel& signal, std::span<const EventMark> events, std::size_t epoch_len);

inline constexpr double kNormEpsilon = 1e-8;

/// Per-channel z-score, (x - mean) / max(std, kNormEpsilon).
Epoch normalize_epoch(const Epoch& e);

}  // namespace acpa::dsp
