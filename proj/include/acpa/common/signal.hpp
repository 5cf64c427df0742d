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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace acpa {

/// Channels x samples, channel-major (each channel's samples contiguous).
struct MultiChannel {
  std::size_t channels = 0;
  std::size_t samples = 0;
  double fs = 250.0;
  std::vector<double> data;

  MultiChannel() = default;
  MultiChannel(std::size_t c, std::size_t n, double rate) : channels(c), samples(n), fs(rate), data(c * n, 0.0) {}

  std::span<double> row(std::size_t c) noexcept { return {data.data() + c * samples, samples}; }
  std::span<const double> row(std::size_t c) const noexcept { return {data.data() + c * samples, samples}; }
  double& at(std::size_t c, std::size_t i) noexcept { return data[c * samples + i]; }
  double at(std::size_t c, std::size_t i) const noexcept { return data[c * samples + i]; }

  friend bool operator==(const MultiChannel&, const MultiChannel&) = default;
};

/// The four target classes with stable integer ids. The same classes appear
/// in the literature as "distress" (= Sorrow) and "tranquility" (= Calmness);
/// parse_emotion accepts either spelling.
enum class EmotionLabel : std::uint8_t { Happiness = 0, Sorrow = 1, Sadness = 2, Calmness = 3 };

inline constexpr std::size_t kNumClasses = 4;
/// Feature-file label byte for epochs without a class.
inline constexpr std::uint8_t kUnlabeled = 255;

std::string_view emotion_name(EmotionLabel label) noexcept;
std::optional<EmotionLabel> parse_emotion(std::string_view text) noexcept;
inline std::size_t class_index(EmotionLabel label) noexcept { return static_cast<std::size_t>(label); }

}  // namespace acpa
