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

// Feature file ("EEGFEAT1"): magic[8] | version u16 | count u32 | records of
// (label u8, channels*bins*frames float32), all little-endian, channel-major.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "acpa/dsp/epoch.hpp"

namespace acpa::dsp {

struct StftConfig {
  std::size_t window = 256;  // periodic Hann
  std::size_t hop = 32;
  std::size_t nfft = 256;
  std::size_t first_bin = 5;
  std::size_t n_bins = 16;
  std::size_t n_frames = 63;

  std::size_t epoch_length() const noexcept { return window + (n_frames - 1) * hop; }
  /// Throws Error{InvalidSpec}.
  void validate() const;
};

inline constexpr std::size_t kFeatureChannels = 8;
inline constexpr std::size_t kFeatureBins = 16;
inline constexpr std::size_t kFeatureFrames = 63;

struct FeatureTensor {
  std::size_t channels = kFeatureChannels;
  std::size_t bins = kFeatureBins;
  std::size_t frames = kFeatureFrames;
  std::vector<float> data;  // channels x bins x frames
  std::uint8_t label = kUnlabeled;
  std::uint64_t timestamp_us = 0;  // epoch start, informational (not stored in files)

  float at(std::size_t c, std::size_t b, std::size_t t) const noexcept { return data[(c * bins + b) * frames + t]; }
  bool operator==(const FeatureTensor& o) const noexcept {
    return channels == o.channels && bins == o.bins && frames == o.frames && data == o.data && label == o.label;
  }
};

/// Per channel: Hann-windowed frames, |FFT|, bins first_bin.., log(1 + m).
/// Throws Error{BadEpochLength} unless the epoch has exactly epoch_length() samples.
FeatureTensor stft_features(const Epoch& e, const StftConfig& cfg = {});

/// Raw |X_k| per channel, frame and retained bin (before the log), same layout.
std::vector<double> stft_magnitudes(const Epoch& e, const StftConfig& cfg = {});

inline constexpr std::uint16_t kFeatureFileVersion = 1;

std::vector<std::uint8_t> serialize_features(std::span<const FeatureTensor> records);
/// Records are 8x16x63. Throws Error{BadMagic}, Error{BadVersion} or Error{TruncatedPayload}.
std::vector<FeatureTensor> parse_features(std::span<const std::uint8_t> bytes);
void write_features(const std::string& path, std::span<const FeatureTensor> records);
std::vector<FeatureTensor> read_features(const std::string& path);

}  // namespace acpa::dsp
