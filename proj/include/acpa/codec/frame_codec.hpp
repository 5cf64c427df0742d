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

#include <array>
#include <cstdint>
#include <span>

namespace acpa::codec {

inline constexpr std::size_t kChannels = 8;
inline constexpr std::size_t kFrameBytes = 27;  // 3 status + 8 x 3 data
inline constexpr std::int32_t kCodeMin = -(1 << 23);
inline constexpr std::int32_t kCodeMax = (1 << 23) - 1;
inline constexpr std::uint32_t kSyncNibble = 0xC;

/// Electrode montage, in channel order.
inline constexpr std::array<const char*, kChannels> kChannelNames = {"P3", "Pz", "P4", "O1", "Oz", "O2", "T5", "T6"};

/// Converter settings. The LSB is vref / (gain * 2^23).
struct AdcConfig {
  double vref = 4.5;       // volts
  int gain = 24;
  double sample_rate = 250.0;  // Hz

  /// Throws Error{InvalidSpec} unless vref > 0, gain in {1,2,4,6,8,12,24}
  /// and sample_rate > 0.
  void validate() const;

  double lsb_microvolts() const noexcept { return vref / (static_cast<double>(gain) * 8388608.0) * 1e6; }
  double full_scale_microvolts() const noexcept { return vref / gain * 1e6; }
};

/// Status word bits 19..0: lead-off P (ch1 = bit 19), lead-off N (ch1 =
/// bit 11), GPIO (gpio[0] = bit 3 .. gpio[3] = bit 0). Bits 23..20 carry the 0b1100 sync nibble.
struct StatusFlags {
  std::array<bool, kChannels> loff_p{};
  std::array<bool, kChannels> loff_n{};
  std::array<bool, 4> gpio{};

  friend bool operator==(const StatusFlags&, const StatusFlags&) = default;
};

struct RawFrame {
  std::uint32_t status = kSyncNibble << 20;
  std::array<std::int32_t, kChannels> channel_codes{};
};

struct DecodedSample {
  std::array<double, kChannels> microvolts{};
  StatusFlags flags;
};

using FrameBytes = std::array<std::uint8_t, kFrameBytes>;

double code_to_microvolts(std::int32_t code, const AdcConfig& cfg) noexcept;

/// Round-to-nearest, saturating at the 24-bit limits.
std::int32_t microvolts_to_code(double microvolts, const AdcConfig& cfg) noexcept;

StatusFlags parse_status(std::uint32_t status) noexcept;
std::uint32_t emit_status(const StatusFlags& flags) noexcept;

/// Throws Error{BadLength} for a size other than 27 and Error{BadSync} when
/// the sync nibble is wrong.
RawFrame parse_frame(std::span<const std::uint8_t> bytes);
FrameBytes serialize_frame(const RawFrame& frame) noexcept;

DecodedSample decode_frame(std::span<const std::uint8_t> bytes, const AdcConfig& cfg);
FrameBytes encode_frame(const DecodedSample& sample, const AdcConfig& cfg) noexcept;

}  // namespace acpa::codec
