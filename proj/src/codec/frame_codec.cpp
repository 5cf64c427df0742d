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

#include "acpa/codec/frame_codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "acpa/common/error.hpp"

namespace acpa::codec {

void AdcConfig::validate() const {
  constexpr std::array<int, 7> kGains = {1, 2, 4, 6, 8, 12, 24};
  if (!(vref > 0.0)) throw Error(ErrorCode::InvalidSpec, "vref must be positive");
  if (std::find(kGains.begin(), kGains.end(), gain) == kGains.end())
    throw Error(ErrorCode::InvalidSpec, "gain " + std::to_string(gain) + " is not a PGA setting");
  if (!(sample_rate > 0.0)) throw Error(ErrorCode::InvalidSpec, "sample_rate must be positive");
}

double code_to_microvolts(std::int32_t code, const AdcConfig& cfg) noexcept {
  return static_cast<double>(code) * cfg.lsb_microvolts();
}

std::int32_t microvolts_to_code(double microvolts, const AdcConfig& cfg) noexcept {
  const double steps = std::nearbyint(microvolts / cfg.lsb_microvolts());
  if (std::isnan(steps)) return 0;
  return static_cast<std::int32_t>(std::clamp(steps, static_cast<double>(kCodeMin), static_cast<double>(kCodeMax)));
}

StatusFlags parse_status(std::uint32_t status) noexcept {
  StatusFlags f;
  for (std::size_t ch = 0; ch < kChannels; ++ch) {
    f.loff_p[ch] = (status >> (19 - ch)) & 1u;
    f.loff_n[ch] = (status >> (11 - ch)) & 1u;
  }
  for (std::size_t g = 0; g < 4; ++g) f.gpio[g] = (status >> (3 - g)) & 1u;
  return f;
}

std::uint32_t emit_status(const StatusFlags& flags) noexcept {
  std::uint32_t s = kSyncNibble << 20;
  for (std::size_t ch = 0; ch < kChannels; ++ch) {
    if (flags.loff_p[ch]) s |= 1u << (19 - ch);
    if (flags.loff_n[ch]) s |= 1u << (11 - ch);
  }
  for (std::size_t g = 0; g < 4; ++g)
    if (flags.gpio[g]) s |= 1u << (3 - g);
  return s;
}

namespace {

std::uint32_t read_u24(const std::uint8_t* p) noexcept {
  return (std::uint32_t{p[0]} << 16) | (std::uint32_t{p[1]} << 8) | std::uint32_t{p[2]};
}

void write_u24(std::uint8_t* p, std::uint32_t v) noexcept {
  p[0] = static_cast<std::uint8_t>(v >> 16);
  p[1] = static_cast<std::uint8_t>(v >> 8);
  p[2] = static_cast<std::uint8_t>(v);
}

std::int32_t sign_extend_24(std::uint32_t v) noexcept {
  return static_cast<std::int32_t>(v << 8) >> 8;
}

}  // namespace

RawFrame parse_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kFrameBytes)
    throw Error(ErrorCode::BadLength, "frame is " + std::to_string(bytes.size()) + " octets, expected 27");
  RawFrame f;
  f.status = read_u24(bytes.data());
  if ((f.status >> 20) != kSyncNibble) throw Error(ErrorCode::BadSync, "status sync nibble is not 0b1100");
  for (std::size_t ch = 0; ch < kChannels; ++ch) f.channel_codes[ch] = sign_extend_24(read_u24(bytes.data() + 3 + 3 * ch));
  return f;
}

FrameBytes serialize_frame(const RawFrame& frame) noexcept {
  FrameBytes out{};
  write_u24(out.data(), frame.status & 0xFFFFFFu);
  for (std::size_t ch = 0; ch < kChannels; ++ch)
    write_u24(out.data() + 3 + 3 * ch, static_cast<std::uint32_t>(frame.channel_codes[ch]) & 0xFFFFFFu);
  return out;
}

DecodedSample decode_frame(std::span<const std::uint8_t> bytes, const AdcConfig& cfg) {
  const RawFrame f = parse_frame(bytes);
  DecodedSample s;
  s.flags = parse_status(f.status);
  for (std::size_t ch = 0; ch < kChannels; ++ch) s.microvolts[ch] = code_to_microvolts(f.channel_codes[ch], cfg);
  return s;
}

FrameBytes encode_frame(const DecodedSample& sample, const AdcConfig& cfg) noexcept {
  RawFrame f;
  f.status = emit_status(sample.flags);
  for (std::size_t ch = 0; ch < kChannels; ++ch) f.channel_codes[ch] = microvolts_to_code(sample.microvolts[ch], cfg);
  return serialize_frame(f);
}

}  // namespace acpa::codec
