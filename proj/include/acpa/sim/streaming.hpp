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

#include <cstddef>

#include "acpa/codec/frame_codec.hpp"
#include "acpa/net/transport.hpp"
#include "acpa/sim/device_sim.hpp"
#include "acpa/sim/raw_file.hpp"

namespace acpa::sim {

/// generate_session -> per-sample frame encode/decode -> send_stream.
net::SendReport stream_session(const SimConfig& cfg, const net::Endpoint& dest, std::size_t batch = 10,
                               net::Pace pace = net::Pace::realtime_at(250.0),
                               const codec::AdcConfig& adc = {});

/// Replays a capture's samples over UDP; the payload stream is byte-identical
/// to streaming the session that produced the capture.
net::SendReport replay_capture(const RawCapture& capture, const net::Endpoint& dest, std::size_t batch,
                               net::Pace pace);

}  // namespace acpa::sim
