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

#include "acpa/sim/streaming.hpp"

namespace acpa::sim {

net::SendReport stream_session(const SimConfig& cfg, const net::Endpoint& dest, std::size_t batch, net::Pace pace,
                               const codec::AdcConfig& adc) {
  const Session session = generate_session(cfg);
  const RawCapture cap = device_capture(session.signal, adc);
  return net::send_stream(dest, cap.samples, batch, pace);
}

net::SendReport replay_capture(const RawCapture& capture, const net::Endpoint& dest, std::size_t batch,
                               net::Pace pace) {
  return net::send_stream(dest, capture.samples, batch, pace);
}

}  // namespace acpa::sim
