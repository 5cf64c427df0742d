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

#include <bit>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "acpa/common/error.hpp"
#include "acpa/net/packet.hpp"

namespace {

using namespace acpa::net;

std::vector<std::uint8_t> from_hex(const std::string& hex) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) out.push_back(static_cast<std::uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
  return out;
}

acpa::ErrorCode parse_error(std::span<const std::uint8_t> bytes) {
  try {
    parse_packet(bytes);
  } catch (const acpa::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parse_packet accepted " << bytes.size() << " octets";
  return acpa::ErrorCode::IoError;
}

TEST(Packet, EmptyPacketIsHeaderOnly) {
  const auto bytes = serialize_packet(StreamPacket{});
  ASSERT_EQ(bytes.size(), 20u);
  EXPECT_EQ(bytes[0], 0x45);
  EXPECT_EQ(bytes[1], 0x45);
  EXPECT_EQ(bytes[2], 0x47);
  EXPECT_EQ(bytes[3], 0x31);
}

TEST(Packet, OneZeroSample) {
  StreamPacket p;
  p.samples.push_back({});
  const auto bytes = serialize_packet(p);
  ASSERT_EQ(bytes.size(), 52u);
  for (std::size_t i = 20; i < 52; ++i) EXPECT_EQ(bytes[i], 0) << i;
}

TEST(Packet, TruncationDetected) {
  StreamPacket p;
  p.samples.assign(2, SampleFrame{});
  auto bytes = serialize_packet(p);
  EXPECT_EQ(parse_error(std::span(bytes).first(19)), acpa::ErrorCode::TruncatedPayload);
  EXPECT_EQ(parse_error(std::span(bytes).first(52)), acpa::ErrorCode::TruncatedPayload);
  bytes[0] = 'X';
  EXPECT_EQ(parse_error(bytes), acpa::ErrorCode::BadMagic);
  bytes[0] = 'E';
  bytes[4] = 2;
  EXPECT_EQ(parse_error(bytes), acpa::ErrorCode::BadVersion);
}

TEST(Packet, OversizeRejected) {
  StreamPacket p;
  p.samples.assign(kMaxSamplesPerPacket, SampleFrame{});
  EXPECT_EQ(serialize_packet(p).size(), 1300u);
  p.samples.push_back({});
  try {
    serialize_packet(p);
    FAIL();
  } catch (const acpa::Error& e) {
    EXPECT_EQ(e.code(), acpa::ErrorCode::PayloadTooLarge);
  }
}

TEST(Packet, RandomRoundtrip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<float> g(0.0f, 50.0f);
  for (int i = 0; i < 500; ++i) {
    StreamPacket p;
    p.flags = static_cast<std::uint8_t>(rng());
    p.seq = static_cast<std::uint32_t>(rng());
    p.timestamp_us = rng();
    p.samples.resize(rng() % (kMaxSamplesPerPacket + 1));
    for (auto& s : p.samples)
      for (float& v : s) v = g(rng);
    const auto bytes = serialize_packet(p);
    ASSERT_EQ(bytes.size(), kHeaderBytes + kBytesPerSample * p.samples.size());
    ASSERT_EQ(parse_packet(bytes), p);
  }
}

TEST(Packet, GoldenVectors) {
  std::ifstream in(std::string(ACPA_TEST_DATA_DIR) + "/packets.golden");
  ASSERT_TRUE(in);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string hex;
    unsigned flags = 0;
    std::uint32_t seq = 0;
    std::uint64_t ts = 0;
    std::size_t n = 0;
    ls >> hex >> flags >> seq >> ts >> n;
    ASSERT_FALSE(ls.fail()) << line;
    StreamPacket expect;
    expect.flags = static_cast<std::uint8_t>(flags);
    expect.seq = seq;
    expect.timestamp_us = ts;
    expect.samples.resize(n);
    for (auto& s : expect.samples)
      for (float& v : s) {
        std::string bits;
        ls >> bits;
        v = std::bit_cast<float>(static_cast<std::uint32_t>(std::stoul(bits, nullptr, 16)));
      }
    ASSERT_FALSE(ls.fail()) << line;
    const auto bytes = from_hex(hex);
    const StreamPacket got = parse_packet(bytes);
    EXPECT_EQ(got.seq, seq);
    EXPECT_EQ(got.timestamp_us, ts);
    ASSERT_EQ(got.samples.size(), n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < 8; ++c)
        EXPECT_EQ(std::bit_cast<std::uint32_t>(got.samples[i][c]), std::bit_cast<std::uint32_t>(expect.samples[i][c]));
    EXPECT_EQ(serialize_packet(expect), bytes);
    ++rows;
  }
  EXPECT_EQ(rows, 6);
}

}  // namespace
