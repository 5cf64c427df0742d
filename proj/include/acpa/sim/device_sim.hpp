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

// Synthetic eight-channel EEG source. It stands in for a subject wearing the
// acquisition rig: class-dependent band-limited oscillations plus pink noise,
// mains pickup and eye-blink artifacts, with every component returned
// separately so downstream stages can be scored against ground truth.
//
// The per-class spectral profiles are a simulator design, not physiology.

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "acpa/common/signal.hpp"

namespace acpa::sim {

inline constexpr std::size_t kChannels = 8;

/// Band powers (uV^2, channel average) of the 8-13 Hz and 13-18 Hz sources.
struct ClassProfile {
  double alpha_power = 0.0;
  double beta_power = 0.0;
};

/// Defaults: Happiness high beta / low alpha, Sorrow mid / mid, Sadness low /
/// low, Calmness high alpha / low beta. Alpha:beta ratios are -9.5, 0, +4.4
/// and +10.5 dB, so any two classes differ by at least 4 dB.
ClassProfile default_profile(EmotionLabel label) noexcept;

struct SimConfig {
  double fs = 250.0;
  double duration_s = 60.0;
  std::uint64_t seed = 1;
  EmotionLabel label = EmotionLabel::Calmness;
  double alpha_band_power = 400.0;  // uV^2
  double beta_band_power = 36.0;    // uV^2
  double pink_noise_rms = 4.0;      // uV
  double mains_freq = 50.0;         // Hz
  double mains_amp = 10.0;          // uV
  double blink_rate = 20.0;         // events per minute
  double blink_amp = 250.0;         // uV at the strongest channel
  double amplitude_scale = 1.0;
  /// Per-channel multiplier on the pink-noise level (all ones = homogeneous).
  std::array<double, kChannels> channel_noise_scale{1, 1, 1, 1, 1, 1, 1, 1};

  /// Default configuration carrying `label`'s spectral profile.
  static SimConfig for_class(EmotionLabel label, std::uint64_t seed, double duration_s);

  std::size_t n_samples() const noexcept;

  /// Throws Error{InvalidSpec} unless fs > 2 * mains_freq, duration > 0 and
  /// every amplitude is non-negative.
  void validate() const;
};

/// Exact components of one generated session: emitted = clean + artifact + mains.
struct GroundTruth {
  MultiChannel clean_signal;
  MultiChannel artifact_waveform;
  MultiChannel mains_waveform;
  std::vector<std::size_t> blink_times;
  EmotionLabel label = EmotionLabel::Calmness;
};

struct Session {
  MultiChannel signal;
  GroundTruth truth;
};

/// Deterministic in `cfg` (including the seed).
Session generate_session(const SimConfig& cfg);

/// 300 ms raised-cosine pulse with unit peak.
std::vector<double> blink_template(double fs);

/// Relative blink amplitude per channel (largest on T5/T6).
const std::array<double, kChannels>& blink_spatial_weights() noexcept;

struct BlinkRecord {
  std::vector<std::size_t> times;
  MultiChannel waveform;  // exactly what was added
};

/// Adds blink templates at the given sample indices (pulses running past the
/// end are truncated).
BlinkRecord add_blinks(MultiChannel& signal, std::span<const std::size_t> times, double amplitude);

/// Poisson blink onsets at `blink_rate` per minute drawn from `rng`.
std::vector<std::size_t> draw_blink_times(std::size_t n_samples, double fs, double rate_per_min, std::mt19937_64& rng);

/// Draws blink times with a generator derived from cfg.seed and adds them.
BlinkRecord inject_artifacts(MultiChannel& signal, const SimConfig& cfg);

struct Event {
  std::size_t sample = 0;
  EmotionLabel label = EmotionLabel::Calmness;
};

/// Non-overlapping event markers of `epoch_len` samples, starting after
/// `lead_in_s` seconds (room for the causal filter to settle).
std::vector<Event> schedule_events(const SimConfig& cfg, std::size_t epoch_len, double lead_in_s);

}  // namespace acpa::sim
