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

#include "acpa/dsp/epoch.hpp"

#include <algorithm>
#include <cmath>

namespace acpa::dsp {

Segmentation segment_epochs(const MultiChannel& signal, std::span<const EventMark> events, std::size_t epoch_len) {
  Segmentation out;
  for (const EventMark& ev : events) {
    if (epoch_len == 0 || ev.sample + epoch_len > signal.samples) {
      out.skipped.push_back(ev);
      continue;
    }
    Epoch e;
    e.label = ev.label;
    e.origin = ev.sample;
    e.data = MultiChannel(signal.channels, epoch_len, signal.fs);
    for (std::size_t c = 0; c < signal.channels; ++c) {
      const auto src = signal.row(c).subspan(ev.sample, epoch_len);
      std::ranges::copy(src, e.data.row(c).begin());
    }
    out.epochs.push_back(std::move(e));
  }
  return out;
}

Epoch normalize_epoch(const Epoch& e) {
  Epoch out = e;
  const std::size_t n = e.data.samples;
  if (n == 0) return out;
  for (std::size_t c = 0; c < e.data.channels; ++c) {
    auto row = out.data.row(c);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double sd = std::max(std::sqrt(var), kNormEpsilon);
    for (double& v : row) v = (v - mean) / sd;
  }
  return out;
}

}  // namespace acpa::dsp
