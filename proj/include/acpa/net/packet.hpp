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
#include <vector>

namespace acpa::net {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'E', 'E', 'G', '1'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 20;
inline constexpr std::size_t kBytesPerSample = 32;  // 8 x float32
/// 20 + 40 * 32 = 1300 octets, below a 1500-octet Ethernet MTU.
inline constexpr std::size_t kMaxSamplesPerPacket = 40;
inline constexpr std::uint16_t kDefaultPort = 9530;

/// One time point of the eight channels, in microvolts.
using SampleFrame = std::array<float, 8>;

/// Wire layout (all integers and floats little-endian):
///   magic "EEG1" | version u8 | flags u8 | seq u32 | timestamp_us u64 |
///   n_samples u16 | n_samples x 8 x float32
struct StreamPacket {
  std::uint8_t version = kVersion;
  std::uint8_t flags = 0;
  std::uint32_t seq = 0;
  std::uint64_t timestamp_us = 0;
  std::vector<SampleFrame> samples;

  friend bool operator==(const StreamPacket&, const StreamPacket&) = default;
};

/// Throws Error{PayloadTooLarge} above kMaxSamplesPerPacket samples.
std::vector<std::uint8_t> serialize_packet(const StreamPacket& packet);

/// Throws Error{TruncatedPayload}, Error{BadMagic} or Error{BadVersion}.
StreamPacket parse_packet(std::span<const std::uint8_t> bytes);

}  // namespace acpa::net
