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

#include <thread>

#include "acpa/common/error.hpp"
#include "acpa/net/bounded_queue.hpp"
#include "acpa/net/transport.hpp"

namespace {

using namespace acpa::net;
using namespace std::chrono_literals;

std::vector<SampleFrame> ramp(std::size_t n) {
  std::vector<SampleFrame> v(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < 8; ++c) v[i][c] = static_cast<float>(i) + 0.125f * static_cast<float>(c);
  return v;
}

std::vector<StreamPacket> collect(std::span<const SampleFrame> samples, std::size_t batch, Pace pace,
                                  SendReport* report = nullptr) {
  std::vector<StreamPacket> out;
  const SendReport r = stream_packets(samples, batch, pace, [&](std::span<const std::uint8_t> d) { out.push_back(parse_packet(d)); });
  if (report) *report = r;
  return out;
}

ReceiveOptions loopback_options() {
  ReceiveOptions o;
  o.bind_host = "127.0.0.1";
  o.port = 0;
  o.idle_timeout = 300ms;
  o.startup_timeout = 5000ms;
  return o;
}

TEST(Transport, BatchingArithmetic) {
  const auto s100 = ramp(100);
  const auto p = collect(s100, 10, Pace::unpaced());
  ASSERT_EQ(p.size(), 10u);
  for (std::uint32_t i = 0; i < 10; ++i) {
    EXPECT_EQ(p[i].seq, i);
    EXPECT_EQ(p[i].samples.size(), 10u);
  }
  const auto s101 = ramp(101);
  const auto q = collect(s101, 10, Pace::unpaced());
  ASSERT_EQ(q.size(), 11u);
  EXPECT_EQ(q.back().samples.size(), 1u);
  EXPECT_EQ(q.back().samples[0], s101.back());
  for (std::size_t i = 1; i < q.size(); ++i) EXPECT_LE(q[i - 1].timestamp_us, q[i].timestamp_us);
}

TEST(Transport, OversizeBatchRejected) {
  const auto s = ramp(100);
  EXPECT_THROW(collect(s, kMaxSamplesPerPacket + 1, Pace::unpaced()), acpa::Error);
  EXPECT_THROW(collect(s, 0, Pace::unpaced()), acpa::Error);
}

TEST(Transport, RealtimePacing) {
  const auto s = ramp(2500);
  SendReport r;
  const auto p = collect(s, 10, Pace::realtime_at(250.0), &r);
  EXPECT_EQ(p.size(), 250u);
  EXPECT_GE(r.wall_seconds, 9.96);
  EXPECT_LT(r.wall_seconds, 12.0);
}

TEST(Transport, EndpointParsing) {
  EXPECT_EQ(Endpoint::parse("10.0.0.2:7000").host, "10.0.0.2");
  EXPECT_EQ(Endpoint::parse("10.0.0.2:7000").port, 7000);
  EXPECT_EQ(Endpoint::parse(":7001").port, 7001);
  EXPECT_EQ(Endpoint::parse("localhost").port, kDefaultPort);
}

TEST(Transport, LoopbackConservation) {
  Receiver rx(loopback_options());
  const auto samples = ramp(2503);
  std::vector<SampleFrame> got;
  std::jthread sender([&] {
    std::this_thread::sleep_for(50ms);
    send_stream({"127.0.0.1", rx.port()}, samples, 10, Pace::realtime_at(25000.0));
  });
  const ReceiverStats st = rx.run([&](const StreamPacket& p) { got.insert(got.end(), p.samples.begin(), p.samples.end()); });
  EXPECT_EQ(st.received, 251u);
  EXPECT_EQ(st.lost, 0u);
  EXPECT_EQ(st.duplicated, 0u);
  EXPECT_EQ(st.malformed, 0u);
  EXPECT_EQ(st.samples, samples.size());
  EXPECT_EQ(st.highest_seq, 250u);
  EXPECT_EQ(got, samples);
  EXPECT_GE(st.latency_max_us, st.latency_mean_us);
}

TEST(Transport, ReceiverCountsMalformedAndDuplicates) {
  Receiver rx(loopback_options());
  std::jthread sender([&] {
    std::this_thread::sleep_for(50ms);
    UdpSocket s = UdpSocket::connect({"127.0.0.1", rx.port()});
    StreamPacket p;
    p.samples.resize(3);
    const auto bytes = serialize_packet(p);
    s.send(bytes);
    s.send(bytes);
    const std::uint8_t junk[5] = {1, 2, 3, 4, 5};
    s.send(junk);
    p.seq = 3;
    s.send(serialize_packet(p));
  });
  std::size_t delivered = 0;
  const ReceiverStats st = rx.run([&](const StreamPacket&) { ++delivered; });
  EXPECT_EQ(delivered, 2u);
  EXPECT_EQ(st.received, 2u);
  EXPECT_EQ(st.duplicated, 1u);
  EXPECT_EQ(st.malformed, 1u);
  EXPECT_EQ(st.lost, 2u);
}

TEST(Transport, MaxPacketsStopsEarly) {
  ReceiveOptions o = loopback_options();
  o.max_packets = 5;
  o.idle_timeout = 5000ms;
  Receiver rx(o);
  const auto samples = ramp(200);
  std::jthread sender([&] {
    std::this_thread::sleep_for(50ms);
    send_stream({"127.0.0.1", rx.port()}, samples, 10, Pace::realtime_at(2500.0));
  });
  const auto t0 = std::chrono::steady_clock::now();
  const ReceiverStats st = rx.run([](const StreamPacket&) {});
  EXPECT_EQ(st.received, 5u);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 4s);
}

TEST(Transport, StartupTimeoutWithoutSender) {
  ReceiveOptions o = loopback_options();
  o.startup_timeout = 200ms;
  const auto t0 = std::chrono::steady_clock::now();
  const ReceiverStats st = receive_loop(o, [](const StreamPacket&) {});
  EXPECT_FALSE(st.any);
  EXPECT_EQ(st.received, 0u);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 2s);
}

TEST(BoundedQueue, EvictsOldestWhenFull) {
  BoundedQueue<int> q(3);
  EXPECT_FALSE(q.push(1));
  EXPECT_FALSE(q.push(2));
  EXPECT_FALSE(q.push(3));
  EXPECT_TRUE(q.push(4));
  q.close();
  std::vector<int> out;
  while (auto v = q.pop()) out.push_back(*v);
  EXPECT_EQ(out, (std::vector<int>{2, 3, 4}));
}

TEST(BoundedQueue, PopUnblocksOnClose) {
  BoundedQueue<int> q(2);
  std::jthread closer([&] {
    std::this_thread::sleep_for(20ms);
    q.close();
  });
  EXPECT_FALSE(q.pop().has_value());
}

}  // namespace
