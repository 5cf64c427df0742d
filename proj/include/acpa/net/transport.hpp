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

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include "acpa/codec/frame_codec.hpp"
#include "acpa/net/packet.hpp"
#include "acpa/net/sequence_tracker.hpp"

namespace acpa::net {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;

  /// Accepts "host:port", "host" or ":port".
  static Endpoint parse(const std::string& text);
};

/// Microseconds on the host's monotonic clock; shared by every process on a
/// host, so same-host latency is receive_now - timestamp_us.
std::uint64_t monotonic_us() noexcept;

/// Owning IPv4 UDP socket.
class UdpSocket {
 public:
  UdpSocket() = default;
  ~UdpSocket();
  UdpSocket(UdpSocket&& other) noexcept;
  UdpSocket& operator=(UdpSocket&& other) noexcept;
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;

  /// Port 0 picks an ephemeral port; see local_port(). Throws Error{BindError}.
  static UdpSocket bind(const std::string& host, std::uint16_t port);
  /// Throws Error{SocketError}.
  static UdpSocket connect(const Endpoint& dest);

  void send(std::span<const std::uint8_t> datagram);
  /// Waits up to `timeout`; nullopt on timeout.
  std::optional<std::size_t> receive(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout);
  std::uint16_t local_port() const;

 private:
  explicit UdpSocket(int fd) noexcept : fd_(fd) {}
  int fd_ = -1;
};

struct Pace {
  bool realtime = false;
  double sample_rate = 250.0;

  static Pace unpaced() { return {}; }
  static Pace realtime_at(double fs) { return {true, fs}; }
};

struct SendReport {
  std::uint64_t packets = 0;
  std::uint64_t samples = 0;
  double wall_seconds = 0.0;
};

using PacketSink = std::function<void(std::span<const std::uint8_t>)>;

/// Splits `samples` into packets of `batch` (the last may be short) with
/// contiguous seq from 0, timestamps them from monotonic_us() at send time,
/// and hands the serialized bytes to `sink`. Realtime pacing releases packet
/// k no earlier than k * batch / fs after the start.
SendReport stream_packets(std::span<const SampleFrame> samples, std::size_t batch, Pace pace, const PacketSink& sink);

SendReport send_stream(const Endpoint& dest, std::span<const SampleFrame> samples, std::size_t batch, Pace pace);
SendReport send_stream(const Endpoint& dest, std::span<const codec::DecodedSample> samples, std::size_t batch,
                       Pace pace);

struct ReceiveOptions {
  std::string bind_host = "0.0.0.0";
  std::uint16_t port = kDefaultPort;
  /// Stop after this long without a datagram once the stream has started.
  std::chrono::milliseconds idle_timeout{2000};
  /// Stop if nothing arrives at all within this window.
  std::chrono::milliseconds startup_timeout{30000};
  std::optional<std::uint64_t> max_packets;
  std::size_t queue_capacity = 256;
  std::uint32_t first_expected_seq = 0;
};

/// Consumer callback: one call per delivered packet, in arrival order.
using SampleConsumer = std::function<void(const StreamPacket&)>;

/// UDP sink. Construction binds the socket (so the port is known before any
/// sender starts); run() spawns the receiving thread and runs the consumer on
/// the calling thread, handing packets across a bounded queue that evicts the
/// oldest entry when full.
class Receiver {
 public:
  explicit Receiver(ReceiveOptions options);
  ~Receiver();
  Receiver(const Receiver&) = delete;
  Receiver& operator=(const Receiver&) = delete;

  std::uint16_t port() const;

  ReceiverStats run(const SampleConsumer& consume, std::stop_token stop = {});

  /// Consistent snapshot; safe to call from any thread while run() is active.
  ReceiverStats stats() const;

 private:
  struct State;
  ReceiveOptions options_;
  UdpSocket socket_;
  std::unique_ptr<State> state_;
};

/// Binds `options.port`, receives until a stop condition, returns final stats.
ReceiverStats receive_loop(const ReceiveOptions& options, const SampleConsumer& consume, std::stop_token stop = {});

}  // namespace acpa::net
