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

#include "acpa/net/packet.hpp"

#include <algorithm>
#include <string>

#include "acpa/common/binary_io.hpp"
#include "acpa/common/error.hpp"

namespace acpa::net {

std::vector<std::uint8_t> serialize_packet(const StreamPacket& packet) {
  if (packet.samples.size() > kMaxSamplesPerPacket) {
    throw Error(ErrorCode::PayloadTooLarge,
                std::to_string(packet.samples.size()) + " samples exceed the per-packet limit of " +
                    std::to_string(kMaxSamplesPerPacket));
  }
  io::ByteWriter w;
  w.put_bytes(kMagic);
  w.put(packet.version);
  w.put(packet.flags);
  w.put(packet.seq);
  w.put(packet.timestamp_us);
  w.put(static_cast<std::uint16_t>(packet.samples.size()));
  for (const SampleFrame& s : packet.samples)
    for (float v : s) w.put(v);
  return w.take();
}

StreamPacket parse_packet(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) {
    throw Error(ErrorCode::TruncatedPayload, std::to_string(bytes.size()) + " octets is shorter than the header");
  }
  io::ByteReader r(bytes);
  const auto magic = r.get_bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) throw Error(ErrorCode::BadMagic, "expected \"EEG1\"");
  StreamPacket p;
  p.version = r.get<std::uint8_t>();
  if (p.version != kVersion) throw Error(ErrorCode::BadVersion, "packet version " + std::to_string(p.version));
  p.flags = r.get<std::uint8_t>();
  p.seq = r.get<std::uint32_t>();
  p.timestamp_us = r.get<std::uint64_t>();
  const std::size_t n = r.get<std::uint16_t>();
  if (bytes.size() != kHeaderBytes + kBytesPerSample * n) {
    throw Error(ErrorCode::TruncatedPayload, "header claims " + std::to_string(n) + " samples but datagram has " +
                                                 std::to_string(bytes.size()) + " octets");
  }
  p.samples.resize(n);
  for (SampleFrame& s : p.samples)
    for (float& v : s) v = r.get<float>();
  return p;
}

}  // namespace acpa::net
