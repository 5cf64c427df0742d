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

// Flat key=value run configuration. Every key has a built-in default; a
// configuration file (UTF-8, '#' starts a comment) overrides defaults and
// command-line flags override the file. Unknown keys are rejected.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "acpa/codec/frame_codec.hpp"
#include "acpa/dsp/pipeline.hpp"
#include "acpa/harness/dataset.hpp"
#include "acpa/harness/training.hpp"
#include "acpa/net/transport.hpp"
#include "acpa/nn/model.hpp"
#include "acpa/sim/device_sim.hpp"

namespace acpa::cli {

enum class Source { Default, File, Flag };
std::string_view to_string(Source s) noexcept;

struct ConfigEntry {
  std::string key;
  std::string value;
  std::string doc;
  Source source = Source::Default;
};

class RunConfig {
 public:
  RunConfig();

  /// Throws Error{ConfigError} for an unknown key.
  void set(std::string_view key, std::string value, Source source);
  /// "key=value" lines; blank lines and '#' comments ignored.
  void load_text(std::string_view text, Source source);
  void load_file(const std::string& path);
  /// Applies "key=value" given on the command line.
  void set_assignment(std::string_view assignment);

  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  std::size_t get_size(std::string_view key) const;
  bool get_bool(std::string_view key) const;

  const std::vector<ConfigEntry>& entries() const noexcept { return entries_; }
  /// One "key=value  # source" line per key, in registry order.
  std::string show() const;

  // Typed views. All throw Error{ConfigError} on malformed values.
  std::uint64_t seed() const;
  sim::SimConfig sim_config() const;
  codec::AdcConfig adc_config() const;
  dsp::PipelineConfig pipeline_config() const;
  nn::ModelConfig model_config() const;
  harness::TrainConfig train_config() const;
  harness::DatasetConfig dataset_config() const;
  net::ReceiveOptions receive_options() const;

 private:
  ConfigEntry& find(std::string_view key);
  const ConfigEntry& find(std::string_view key) const;

  std::vector<ConfigEntry> entries_;
};

}  // namespace acpa::cli
