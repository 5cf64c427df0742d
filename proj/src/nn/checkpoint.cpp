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

#include "acpa/nn/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "acpa/common/binary_io.hpp"
#include "acpa/common/error.hpp"

namespace acpa::nn {

namespace {
constexpr std::array<std::uint8_t, 8> kMagic = {'A', 'C', 'P', 'A', 'N', 'E', 'T', '1'};

void put_tensor(io::ByteWriter& w, const std::string& name, const Tensor& t) {
  w.put_prefixed(name);
  w.put(static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.shape) w.put(static_cast<std::uint32_t>(d));
  w.put(kDtypeF64);
  for (double v : t.data) w.put(v);
}
}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(Model& m) {
  io::ByteWriter w;
  w.put_bytes(kMagic);
  w.put(kCheckpointVersion);
  w.put_prefixed(m.config().to_text());
  for (const Param* p : m.parameters()) put_tensor(w, p->name, p->value);
  for (const auto& [name, t] : m.buffers()) put_tensor(w, name, *t);
  return w.take();
}

Model parse_checkpoint(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  const auto magic = r.get_bytes(8);
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) throw Error(ErrorCode::BadMagic, "not an ACPANET1 checkpoint");
  const auto version = r.get<std::uint16_t>();
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(version) + ", expected " +
                                                std::to_string(kCheckpointVersion));
  const ModelConfig cfg = ModelConfig::from_text(r.get_prefixed());
  Model m(cfg);

  std::map<std::string, Tensor*> slots;
  for (Param* p : m.parameters()) slots[p->name] = &p->value;
  for (const auto& [name, t] : m.buffers()) slots[name] = t;
  std::map<std::string, bool> seen;

  while (!r.done()) {
    const std::string name = r.get_prefixed();
    const auto it = slots.find(name);
    if (it == slots.end()) throw Error(ErrorCode::ShapeMismatch, "checkpoint tensor '" + name + "' not in the model");
    const std::size_t rank = r.get<std::uint8_t>();
    std::vector<std::size_t> dims(rank);
    for (std::size_t& d : dims) d = r.get<std::uint32_t>();
    if (dims != it->second->shape)
      throw Error(ErrorCode::ShapeMismatch, "checkpoint tensor '" + name + "' has shape " + shape_string(dims) +
                                                ", config implies " + shape_string(it->second->shape));
    if (r.get<std::uint8_t>() != kDtypeF64) throw Error(ErrorCode::ShapeMismatch, "tensor '" + name + "' is not f64");
    for (double& v : it->second->data) v = r.get<double>();
    seen[name] = true;
  }
  for (const auto& [name, t] : slots)
    if (!seen.count(name)) throw Error(ErrorCode::ShapeMismatch, "checkpoint lacks tensor '" + name + "'");
  m.set_training(false);
  return m;
}

void checkpoint_save(Model& m, const std::string& path) { io::write_file(path, serialize_checkpoint(m)); }

Model checkpoint_load(const std::string& path) { return parse_checkpoint(io::read_file(path)); }

}  // namespace acpa::nn
