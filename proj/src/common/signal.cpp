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

#include "acpa/common/signal.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace acpa {

std::string_view emotion_name(EmotionLabel label) noexcept {
  switch (label) {
    case EmotionLabel::Happiness: return "happiness";
    case EmotionLabel::Sorrow: return "sorrow";
    case EmotionLabel::Sadness: return "sadness";
    case EmotionLabel::Calmness: return "calmness";
  }
  return "unknown";
}

std::optional<EmotionLabel> parse_emotion(std::string_view text) noexcept {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "happiness" || s == "0") return EmotionLabel::Happiness;
  if (s == "sorrow" || s == "distress" || s == "1") return EmotionLabel::Sorrow;
  if (s == "sadness" || s == "2") return EmotionLabel::Sadness;
  if (s == "calmness" || s == "tranquility" || s == "3") return EmotionLabel::Calmness;
  return std::nullopt;
}

}  // namespace acpa
