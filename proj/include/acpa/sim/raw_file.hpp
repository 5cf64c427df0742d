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

// Raw capture file ("EEGRAW1\0"):
//   magic[8] | version u16 | n_channels u16 | fs f64 | 8 x char[8] channel
//   names (zero padded) | records of (timestamp_us u64, 8 x float32 uV)
// Everything little-endian. Timestamps are sample times (index * 1e6 / fs),
// not wall-clock, so a capture is reproducible.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "acpa/codec/frame_codec.hpp"
#include "acpa/common/signal.hpp"
#include "acpa/net/packet.hpp"
#include "acpa/sim/device_sim.hpp"

namespace acpa::sim {

inline constexpr std::uint16_t kRawVersion = 1;
inline constexpr std::size_t kRawHeaderBytes = 8 + 2 + 2 + 8 + 8 * 8;
inline constexpr std::size_t kRawRecordBytes = 8 + 8 * 4;

struct RawCapture {
  double fs = 250.0;
  std::array<std::string, kChannels> channel_names;
  std::vector<std::uint64_t> timestamps_us;
  std::vector<net::SampleFrame> samples;

  RawCapture();
  void append(std::uint64_t timestamp_us, const net::SampleFrame& s) {
    timestamps_us.push_back(timestamp_us);
    samples.push_back(s);
  }
  MultiChannel to_signal() const;

  friend bool operator==(const RawCapture&, const RawCapture&) = default;
};

std::uint64_t sample_time_us(std::size_t index, double fs) noexcept;

std::vector<std::uint8_t> serialize_raw(const RawCapture& capture);
/// Throws Error{BadMagic}, Error{BadVersion}, Error{ShapeMismatch} (channel
/// count other than 8) or Error{TruncatedPayload}.
RawCapture parse_raw(std::span<const std::uint8_t> bytes);

void write_raw(const std::string& path, const RawCapture& capture);
RawCapture read_raw(const std::string& path);

/// What the acquisition device would emit for `signal`: every sample passed
/// through the 24-bit frame codec and handed on as float32 microvolts.
RawCapture device_capture(const MultiChannel& signal, const codec::AdcConfig& adc);

/// Structured-text (JSON) companion of a simulated session. Keys:
///   format ("acpa-eeg-truth"), version, seed, label, label_id, fs, n_samples,
///   blink_times[], events[{sample, label}], config{...every SimConfig field}
struct TruthSidecar {
  std::uint64_t seed = 0;
  EmotionLabel label = EmotionLabel::Calmness;
  double fs = 250.0;
  std::size_t n_samples = 0;
  std::vector<std::size_t> blink_times;
  std::vector<Event> events;
};

std::string sidecar_path(const std::string& raw_path);
void write_truth_sidecar(const std::string& path, const SimConfig& cfg, const GroundTruth& truth,
                         std::span<const Event> events);
TruthSidecar read_truth_sidecar(const std::string& path);

}  // namespace acpa::sim
