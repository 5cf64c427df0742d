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

#include "acpa/net/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>
#include <utility>

#include "acpa/common/error.hpp"
#include "acpa/net/bounded_queue.hpp"

namespace acpa::net {

namespace {

std::string errno_text() { return std::strerror(errno); }

sockaddr_in resolve(const std::string& host, std::uint16_t port, ErrorCode code) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host.empty() || host == "0.0.0.0") {
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    return addr;
  }
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || res == nullptr)
    throw Error(code, "cannot resolve host '" + host + "'");
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return addr;
}

}  // namespace

Endpoint Endpoint::parse(const std::string& text) {
  Endpoint ep;
  const auto colon = text.rfind(':');
  std::string host = colon == std::string::npos ? text : text.substr(0, colon);
  if (!host.empty()) ep.host = host;
  if (colon != std::string::npos) {
    const std::string port = text.substr(colon + 1);
    try {
      std::size_t used = 0;
      const unsigned long p = std::stoul(port, &used);
      if (used != port.size() || p == 0 || p > 65535) throw std::out_of_range("port");
      ep.port = static_cast<std::uint16_t>(p);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad port in endpoint '" + text + "'");
    }
  }
  return ep;
}

std::uint64_t monotonic_us() noexcept {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

// ---------------------------------------------------------------------------
// UdpSocket

UdpSocket::~UdpSocket() {
  if (fd_ >= 0) ::close(fd_);
}

UdpSocket::UdpSocket(UdpSocket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

UdpSocket& UdpSocket::operator=(UdpSocket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

UdpSocket UdpSocket::bind(const std::string& host, std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd < 0) throw Error(ErrorCode::BindError, "socket(): " + errno_text());
  UdpSocket sock(fd);
  const int rcvbuf = 4 << 20;
  ::setsockopt(fd, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof(rcvbuf));
  const sockaddr_in addr = resolve(host, port, ErrorCode::BindError);
  if (::bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0)
    throw Error(ErrorCode::BindError, "bind " + host + ":" + std::to_string(port) + ": " + errno_text());
  return sock;
}

UdpSocket UdpSocket::connect(const Endpoint& dest) {
  const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd < 0) throw Error(ErrorCode::SocketError, "socket(): " + errno_text());
  UdpSocket sock(fd);
  const sockaddr_in addr = resolve(dest.host, dest.port, ErrorCode::SocketError);
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0)
    throw Error(ErrorCode::SocketError, "connect " + dest.host + ":" + std::to_string(dest.port) + ": " + errno_text());
  return sock;
}

void UdpSocket::send(std::span<const std::uint8_t> datagram) {
  for (;;) {
    const ssize_t n = ::send(fd_, datagram.data(), datagram.size(), 0);
    if (n == static_cast<ssize_t>(datagram.size())) return;
    if (n < 0 && (errno == EINTR || errno == ENOBUFS || errno == EAGAIN)) {
      if (errno != EINTR) std::this_thread::sleep_for(std::chrono::microseconds(50));
      continue;
    }
    // Nobody listening yet on a connected socket; UDP gives no delivery
    // guarantee so the datagram is simply gone.
    if (n < 0 && errno == ECONNREFUSED) return;
    throw Error(ErrorCode::SocketError, "send: " + errno_text());
  }
}

std::optional<std::size_t> UdpSocket::receive(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout) {
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (ready < 0) {
    if (errno == EINTR) return std::nullopt;
    throw Error(ErrorCode::SocketError, "poll: " + errno_text());
  }
  if (ready == 0) return std::nullopt;
  const ssize_t n = ::recv(fd_, buffer.data(), buffer.size(), 0);
  if (n < 0) {
    if (errno == EINTR || errno == EAGAIN) return std::nullopt;
    throw Error(ErrorCode::SocketError, "recv: " + errno_text());
  }
  return static_cast<std::size_t>(n);
}

std::uint16_t UdpSocket::local_port() const {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0)
    throw Error(ErrorCode::SocketError, "getsockname: " + errno_text());
  return ntohs(addr.sin_port);
}

// ---------------------------------------------------------------------------
// Sender

SendReport stream_packets(std::span<const SampleFrame> samples, std::size_t batch, Pace pace, const PacketSink& sink) {
  if (batch == 0 || batch > kMaxSamplesPerPacket)
    throw Error(ErrorCode::PayloadTooLarge, "batch must be in 1.." + std::to_string(kMaxSamplesPerPacket));
  SendReport report;
  const auto start = std::chrono::steady_clock::now();
  StreamPacket p;
  for (std::size_t off = 0; off < samples.size(); off += batch) {
    const std::size_t n = std::min(batch, samples.size() - off);
    if (pace.realtime) {
      const double due_s = static_cast<double>(off) / pace.sample_rate;
      std::this_thread::sleep_until(start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                std::chrono::duration<double>(due_s)));
    }
    p.seq = static_cast<std::uint32_t>(report.packets);
    p.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(off),
                     samples.begin() + static_cast<std::ptrdiff_t>(off + n));
    p.timestamp_us = monotonic_us();
    sink(serialize_packet(p));
    ++report.packets;
    report.samples += n;
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

SendReport send_stream(const Endpoint& dest, std::span<const SampleFrame> samples, std::size_t batch, Pace pace) {
  UdpSocket sock = UdpSocket::connect(dest);
  return stream_packets(samples, batch, pace, [&](std::span<const std::uint8_t> d) { sock.send(d); });
}

SendReport send_stream(const Endpoint& dest, std::span<const codec::DecodedSample> samples, std::size_t batch,
                       Pace pace) {
  std::vector<SampleFrame> frames(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t ch = 0; ch < 8; ++ch) frames[i][ch] = static_cast<float>(samples[i].microvolts[ch]);
  return send_stream(dest, frames, batch, pace);
}

// ---------------------------------------------------------------------------
// Receiver

struct Receiver::State {
  mutable std::mutex mu;
  SequenceTracker tracker;
  ReceiverStats stats;
  double latency_sum = 0.0;

  explicit State(std::uint32_t first) : tracker(first) {}
};

Receiver::Receiver(ReceiveOptions options)
    : options_(std::move(options)),
      socket_(UdpSocket::bind(options_.bind_host, options_.port)),
      state_(std::make_unique<State>(options_.first_expected_seq)) {}

Receiver::~Receiver() = default;

std::uint16_t Receiver::port() const { return socket_.local_port(); }

ReceiverStats Receiver::stats() const {
  std::lock_guard lock(state_->mu);
  ReceiverStats s = state_->stats;
  s.received = state_->tracker.received();
  s.lost = state_->tracker.lost();
  s.reordered = state_->tracker.reordered();
  s.duplicated = state_->tracker.duplicated();
  s.any = state_->tracker.any();
  s.highest_seq = s.any ? state_->tracker.highest() : 0;
  s.latency_mean_us = s.received > 0 ? state_->latency_sum / static_cast<double>(s.received) : 0.0;
  return s;
}

ReceiverStats Receiver::run(const SampleConsumer& consume, std::stop_token stop) {
  BoundedQueue<StreamPacket> queue(options_.queue_capacity);

  std::jthread receiver([&](std::stop_token own) {
    std::vector<std::uint8_t> buf(65536);
    bool started = false;
    auto last_rx = std::chrono::steady_clock::now();
    const auto poll_slice = std::chrono::milliseconds(20);
    std::uint64_t accepted = 0;
    for (;;) {
      if (stop.stop_requested() || own.stop_requested()) break;
      const auto waited = std::chrono::steady_clock::now() - last_rx;
      if (started && waited >= options_.idle_timeout) break;
      if (!started && waited >= options_.startup_timeout) break;
      std::optional<std::size_t> n;
      try {
        n = socket_.receive(buf, poll_slice);
      } catch (const Error&) {
        break;
      }
      if (!n) continue;
      const std::uint64_t rx_us = monotonic_us();
      last_rx = std::chrono::steady_clock::now();
      started = true;
      StreamPacket pkt;
      try {
        pkt = parse_packet(std::span<const std::uint8_t>(buf.data(), *n));
      } catch (const Error&) {
        std::lock_guard lock(state_->mu);
        ++state_->stats.malformed;
        continue;
      }
      bool duplicate = false;
      {
        std::lock_guard lock(state_->mu);
        duplicate = state_->tracker.observe(pkt.seq) == SequenceTracker::Outcome::Duplicate;
        if (!duplicate) {
          const double lat = rx_us >= pkt.timestamp_us ? static_cast<double>(rx_us - pkt.timestamp_us) : 0.0;
          state_->latency_sum += lat;
          state_->stats.latency_max_us = std::max(state_->stats.latency_max_us, lat);
          state_->stats.samples += pkt.samples.size();
        }
      }
      if (duplicate) continue;
      if (queue.push(std::move(pkt))) {
        std::lock_guard lock(state_->mu);
        ++state_->stats.overflow_dropped;
      }
      if (options_.max_packets && ++accepted >= *options_.max_packets) break;
    }
    queue.close();
  });

  while (auto pkt = queue.pop()) consume(*pkt);
  receiver.join();
  return stats();
}

ReceiverStats receive_loop(const ReceiveOptions& options, const SampleConsumer& consume, std::stop_token stop) {
  Receiver rx(options);
  return rx.run(consume, stop);
}

}  // namespace acpa::net
