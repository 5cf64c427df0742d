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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "acpa/codec/frame_codec.hpp"
#include "acpa/common/error.hpp"

namespace {

using namespace acpa::codec;

// 4.5 V / (24 * 2^23), in microvolts.
constexpr double kLsb = 4.5 / (24.0 * 8388608.0) * 1e6;

std::vector<std::uint8_t> from_hex(const std::string& hex) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) out.push_back(static_cast<std::uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
  return out;
}

FrameBytes frame_with(std::uint32_t status, std::uint32_t code) {
  FrameBytes f{};
  f[0] = static_cast<std::uint8_t>(status >> 16);
  f[1] = static_cast<std::uint8_t>(status >> 8);
  f[2] = static_cast<std::uint8_t>(status);
  for (std::size_t c = 0; c < kChannels; ++c) {
    f[3 + 3 * c] = static_cast<std::uint8_t>(code >> 16);
    f[4 + 3 * c] = static_cast<std::uint8_t>(code >> 8);
    f[5 + 3 * c] = static_cast<std::uint8_t>(code);
  }
  return f;
}

TEST(Codec, CodeToMicrovoltsExamples) {
  const AdcConfig cfg;
  EXPECT_EQ(code_to_microvolts(0, cfg), 0.0);
  EXPECT_NEAR(code_to_microvolts(1, cfg), 0.0223517, 1e-7);
  EXPECT_NEAR(code_to_microvolts(kCodeMin, cfg), -187500.0, 1e-9);
  EXPECT_DOUBLE_EQ(cfg.lsb_microvolts(), kLsb);
}

TEST(Codec, MicrovoltsToCodeExamples) {
  const AdcConfig cfg;
  EXPECT_EQ(microvolts_to_code(0.0, cfg), 0);
  EXPECT_EQ(microvolts_to_code(1e6, cfg), 0x7FFFFF);
  EXPECT_EQ(microvolts_to_code(-1e6, cfg), kCodeMin);
}

TEST(Codec, RoundtripWithinHalfLsb) {
  const AdcConfig cfg;
  std::mt19937_64 rng(1);
  const double fs = cfg.full_scale_microvolts();
  std::uniform_real_distribution<double> u(-fs, fs - kLsb);
  for (int i = 0; i < 100000; ++i) {
    const double x = u(rng);
    ASSERT_LE(std::abs(code_to_microvolts(microvolts_to_code(x, cfg), cfg) - x), kLsb / 2 * (1 + 1e-9)) << x;
  }
}

TEST(Codec, MonotoneAndSignExtended) {
  const AdcConfig cfg;
  for (std::int32_t c = kCodeMin; c < kCodeMax; c += 4099)
    ASSERT_LT(code_to_microvolts(c, cfg), code_to_microvolts(c + 1, cfg));
  const auto s = decode_frame(frame_with(0xC00000, 0xFFFFFF), cfg);
  for (double v : s.microvolts) EXPECT_DOUBLE_EQ(v, -kLsb);
  const auto top = decode_frame(frame_with(0xC00000, 0x800000), cfg);
  for (double v : top.microvolts) EXPECT_DOUBLE_EQ(v, -187500.0);
}

TEST(Codec, DecodeFrameExamples) {
  const AdcConfig cfg;
  const auto one = decode_frame(frame_with(0xC00000, 1), cfg);
  for (double v : one.microvolts) EXPECT_NEAR(v, 0.0223517, 1e-7);
  EXPECT_EQ(one.flags, StatusFlags{});
  const auto zero = decode_frame(frame_with(0xC00000, 0), cfg);
  for (double v : zero.microvolts) EXPECT_EQ(v, 0.0);
  try {
    decode_frame(frame_with(0x400000, 0), cfg);
    FAIL() << "expected BadSync";
  } catch (const acpa::Error& e) {
    EXPECT_EQ(e.code(), acpa::ErrorCode::BadSync);
  }
  const std::vector<std::uint8_t> short_frame(26, 0xC0);
  try {
    parse_frame(short_frame);
    FAIL() << "expected BadLength";
  } catch (const acpa::Error& e) {
    EXPECT_EQ(e.code(), acpa::ErrorCode::BadLength);
  }
}

TEST(Codec, EncodeFrameExamples) {
  const AdcConfig cfg;
  const FrameBytes f = encode_frame(DecodedSample{}, cfg);
  EXPECT_EQ(f[0], 0xC0);
  for (std::size_t i = 1; i < kFrameBytes; ++i) EXPECT_EQ(f[i], 0) << i;

  DecodedSample s;
  s.flags.loff_p[0] = true;
  EXPECT_TRUE(decode_frame(encode_frame(s, cfg), cfg).flags.loff_p[0]);
  EXPECT_EQ(encode_frame(s, cfg)[0], 0xC8);  // bit 19
}

TEST(Codec, FrameRoundtripRandom) {
  const AdcConfig cfg;
  std::mt19937_64 rng(2);
  const double fs = cfg.full_scale_microvolts();
  std::uniform_real_distribution<double> u(-fs, fs - kLsb);
  for (int i = 0; i < 1000; ++i) {
    DecodedSample s;
    for (double& v : s.microvolts) v = u(rng);
    const auto back = decode_frame(encode_frame(s, cfg), cfg);
    for (std::size_t c = 0; c < kChannels; ++c)
      ASSERT_LE(std::abs(back.microvolts[c] - s.microvolts[c]), kLsb / 2 * (1 + 1e-9));
  }
}

TEST(Codec, StatusBijectionOnLow20Bits) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 5000; ++i) {
    const std::uint32_t word = (kSyncNibble << 20) | static_cast<std::uint32_t>(rng() & 0xFFFFF);
    ASSERT_EQ(emit_status(parse_status(word)) & 0xFFFFF, word & 0xFFFFF);
    ASSERT_EQ(emit_status(parse_status(word)) >> 20, kSyncNibble);
  }
  StatusFlags f;
  f.loff_n[0] = true;
  EXPECT_EQ(emit_status(f), 0xC00800u);
  f = {};
  f.gpio[0] = true;
  EXPECT_EQ(emit_status(f), 0xC00008u);
}

TEST(Codec, AdcConfigValidation) {
  AdcConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.gain = 5;
  EXPECT_THROW(cfg.validate(), acpa::Error);
  cfg = {};
  cfg.vref = 0.0;
  EXPECT_THROW(cfg.validate(), acpa::Error);
}

TEST(Codec, GoldenFramesBitExact) {
  std::ifstream in(std::string(ACPA_TEST_DATA_DIR) + "/frames.golden");
  ASSERT_TRUE(in);
  const AdcConfig cfg;
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string hex, status_hex;
    ls >> hex >> status_hex;
    std::array<double, kChannels> uv{};
    for (double& v : uv) ls >> v;
    ASSERT_FALSE(ls.fail()) << line;
    const auto bytes = from_hex(hex);
    ASSERT_EQ(bytes.size(), kFrameBytes);

    const RawFrame raw = parse_frame(bytes);
    EXPECT_EQ(raw.status & 0xFFFFF, std::stoul(status_hex, nullptr, 16));
    const FrameBytes again = serialize_frame(raw);
    EXPECT_TRUE(std::equal(again.begin(), again.end(), bytes.begin())) << hex;

    const DecodedSample s = decode_frame(bytes, cfg);
    for (std::size_t c = 0; c < kChannels; ++c) EXPECT_NEAR(s.microvolts[c], uv[c], 1e-12 * (1 + std::abs(uv[c]))) << hex;
    const FrameBytes enc = encode_frame(s, cfg);
    EXPECT_TRUE(std::equal(enc.begin(), enc.end(), bytes.begin())) << hex;
    ++rows;
  }
  EXPECT_GE(rows, 10);
}

}  // namespace
