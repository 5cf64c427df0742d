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

// Checkpoint ("ACPANET1"): magic[8] | version u16 | config text (u32 length
// + UTF-8 key=value lines) | tensors until end of file, each:
//   name (u32 length + bytes) | rank u8 | dims u32 * rank | dtype u8 (1 = f64) | data
// All little-endian. Parameters first, then batch-norm running statistics.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "acpa/nn/model.hpp"

namespace acpa::nn {

inline constexpr std::uint16_t kCheckpointVersion = 1;
inline constexpr std::uint8_t kDtypeF64 = 1;

std::vector<std::uint8_t> serialize_checkpoint(Model& m);
/// Throws Error{BadMagic}, Error{VersionMismatch}, Error{ShapeMismatch}
/// (tensor missing, unknown or shaped unlike the embedded config) or
/// Error{TruncatedPayload}.
Model parse_checkpoint(std::span<const std::uint8_t> bytes);

void checkpoint_save(Model& m, const std::string& path);
Model checkpoint_load(const std::string& path);

}  // namespace acpa::nn
