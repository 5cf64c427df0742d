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

#include "acpa/cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "acpa/common/binary_io.hpp"
#include "acpa/common/error.hpp"

namespace acpa::cli {

namespace {

struct KeySpec {
  const char* key;
  const char* value;
  const char* doc;
};

// Registry order is the order of --show-config output.
constexpr KeySpec kKeys[] = {
    {"seed", "1", "seed for simulation, fold assignment and weight initialization"},
    {"sim.fs", "250", "sample rate (Hz)"},
    {"sim.duration", "60", "session length (s)"},
    {"sim.class", "calmness", "class profile: happiness, sorrow, sadness, calmness"},
    {"sim.alpha_power", "profile", "8-13 Hz band power (uV^2); 'profile' takes the class default"},
    {"sim.beta_power", "profile", "13-18 Hz band power (uV^2); 'profile' takes the class default"},
    {"sim.pink_noise_rms", "4", "background noise level (uV)"},
    {"sim.channel_noise", "1,1,1,1,1,1,1,1", "per-channel noise multipliers, or 'heterogeneous'"},
    {"sim.mains_freq", "50", "mains frequency (Hz)"},
    {"sim.mains_amp", "10", "mains amplitude (uV)"},
    {"sim.blink_rate", "20", "blinks per minute"},
    {"sim.blink_amp", "250", "blink amplitude at the strongest channel (uV)"},
    {"sim.amplitude_scale", "1", "global amplitude multiplier"},
    {"sim.lead_in", "2", "seconds before the first labelled epoch"},
    {"adc.vref", "4.5", "reference voltage (V)"},
    {"adc.gain", "24", "PGA gain"},
    {"filter.order", "11", "low-pass prototype order of the band-pass"},
    {"filter.order_is_overall", "false", "read filter.order as the band-pass order instead"},
    {"filter.low_cut", "5", "lower -3 dB edge (Hz)"},
    {"filter.high_cut", "18", "upper -3 dB edge (Hz)"},
    {"filter.zero_phase", "false", "forward-backward filtering for offline sessions"},
    {"ica.enabled", "true", "artifact removal on/off"},
    {"ica.max_iter", "400", "FastICA iteration cap"},
    {"ica.tol", "1e-6", "FastICA convergence tolerance"},
    {"ica.seed", "458", "FastICA initial-matrix seed"},
    {"ica.kurtosis_threshold", "5", "flag components whose excess kurtosis exceeds this"},
    {"ica.settle", "2", "filter transient excluded from the ICA fit (s)"},
    {"ica.fit_seconds", "30", "live input buffered before the ICA fit (infer)"},
    {"stft.window", "256", "Hann window length (samples)"},
    {"stft.hop", "32", "hop (samples)"},
    {"stft.nfft", "256", "FFT length"},
    {"stft.first_bin", "5", "first retained frequency bin"},
    {"stft.bins", "16", "retained frequency bins"},
    {"stft.frames", "63", "frames per epoch"},
    {"model.stem", "32", "stem convolution channels"},
    {"model.stages", "32x1,64x1", "stages as channels x blocks"},
    {"model.cbam", "true", "attention modules on/off"},
    {"model.cbam_reduction", "8", "channel-attention reduction ratio"},
    {"model.preactivation", "true", "BN-ReLU-conv blocks (false: conv-BN-ReLU)"},
    {"model.spatial_kernel", "7", "spatial-attention kernel size"},
    {"model.fc_hidden", "128", "hidden units of the classifier head"},
    {"model.bn_momentum", "0.1", "batch-norm running-statistics momentum"},
    {"model.bn_eps", "1e-5", "batch-norm epsilon"},
    {"train.epochs", "30", "training epochs"},
    {"train.batch", "32", "mini-batch size"},
    {"train.optimizer", "adam", "adam or sgd"},
    {"train.lr", "0.001", "learning rate"},
    {"train.momentum", "0", "sgd momentum"},
    {"train.weight_decay", "0", "L2 weight decay"},
    {"train.best_snapshot", "true", "keep the best-validation epoch"},
    {"train.folds", "10", "cross-validation folds (0 skips cross-validation in 'train')"},
    {"data.subjects", "1", "synthetic subjects"},
    {"data.per_subject", "950", "samples per subject"},
    {"data.perturbation", "0.2", "subject-specific profile perturbation (fraction)"},
    {"net.host", "127.0.0.1", "destination host"},
    {"net.port", "9530", "UDP port"},
    {"net.batch", "10", "samples per packet"},
    {"net.realtime", "true", "pace packets at the sample rate"},
    {"net.idle_timeout_ms", "2000", "receiver stops after this much silence"},
    {"net.startup_timeout_ms", "30000", "receiver gives up if nothing arrives"},
    {"net.queue", "256", "receiver queue capacity (packets)"},
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw Error(ErrorCode::ConfigError, std::string(key) + "=" + std::string(value) + ": expected " + std::string(want));
}

double parse_double(std::string_view key, std::string_view v) {
  double d = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a number");
  return d;
}

std::vector<double> parse_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const auto item = trim(v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    out.push_back(parse_double(key, item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(Source s) noexcept {
  switch (s) {
    case Source::Default: return "default";
    case Source::File: return "file";
    case Source::Flag: return "flag";
  }
  return "?";
}

RunConfig::RunConfig() {
  for (const KeySpec& k : kKeys) entries_.push_back({k.key, k.value, k.doc, Source::Default});
}

ConfigEntry& RunConfig::find(std::string_view key) {
  for (ConfigEntry& e : entries_)
    if (e.key == key) return e;
  throw Error(ErrorCode::ConfigError, "unknown configuration key '" + std::string(key) + "'");
}

const ConfigEntry& RunConfig::find(std::string_view key) const { return const_cast<RunConfig*>(this)->find(key); }

void RunConfig::set(std::string_view key, std::string value, Source source) {
  ConfigEntry& e = find(key);
  e.value = std::move(value);
  e.source = source;
}

void RunConfig::set_assignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw Error(ErrorCode::ConfigError, "expected key=value, got '" + std::string(assignment) + "'");
  set(trim(assignment.substr(0, eq)), std::string(trim(assignment.substr(eq + 1))), Source::Flag);
}

void RunConfig::load_text(std::string_view text, Source source) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw Error(ErrorCode::ConfigError, "line " + std::to_string(line_no) + ": expected key=value");
      set(trim(line.substr(0, eq)), std::string(trim(line.substr(eq + 1))), source);
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

void RunConfig::load_file(const std::string& path) {
  const auto bytes = io::read_file(path);
  try {
    load_text(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), Source::File);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
}

const std::string& RunConfig::get(std::string_view key) const { return find(key).value; }

double RunConfig::get_double(std::string_view key) const { return parse_double(key, get(key)); }

std::int64_t RunConfig::get_int(std::string_view key) const {
  const std::string& v = get(key);
  std::int64_t i = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return i;
}

std::size_t RunConfig::get_size(std::string_view key) const {
  const std::int64_t i = get_int(key);
  if (i < 0) bad_value(key, get(key), "a non-negative integer");
  return static_cast<std::size_t>(i);
}

bool RunConfig::get_bool(std::string_view key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "true or false");
}

std::string RunConfig::show() const {
  std::size_t width = 0;
  for (const ConfigEntry& e : entries_) width = std::max(width, e.key.size() + 1 + e.value.size());
  std::ostringstream os;
  for (const ConfigEntry& e : entries_) {
    const std::string kv = e.key + "=" + e.value;
    os << kv << std::string(width - kv.size() + 2, ' ') << "# " << to_string(e.source) << '\n';
  }
  return os.str();
}

std::uint64_t RunConfig::seed() const {
  const std::string& v = get("seed");
  std::uint64_t s = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value("seed", v, "an unsigned integer");
  return s;
}

sim::SimConfig RunConfig::sim_config() const {
  const auto label = parse_emotion(get("sim.class"));
  if (!label) bad_value("sim.class", get("sim.class"), "happiness, sorrow, sadness or calmness");
  sim::SimConfig c = sim::SimConfig::for_class(*label, seed(), get_double("sim.duration"));
  c.fs = get_double("sim.fs");
  if (get("sim.alpha_power") != "profile") c.alpha_band_power = get_double("sim.alpha_power");
  if (get("sim.beta_power") != "profile") c.beta_band_power = get_double("sim.beta_power");
  c.pink_noise_rms = get_double("sim.pink_noise_rms");
  c.mains_freq = get_double("sim.mains_freq");
  c.mains_amp = get_double("sim.mains_amp");
  c.blink_rate = get_double("sim.blink_rate");
  c.blink_amp = get_double("sim.blink_amp");
  c.amplitude_scale = get_double("sim.amplitude_scale");
  if (get("sim.channel_noise") == "heterogeneous") {
    c.channel_noise_scale = harness::heterogeneous_noise_scale();
  } else {
    const auto v = parse_list("sim.channel_noise", get("sim.channel_noise"));
    if (v.size() != sim::kChannels) bad_value("sim.channel_noise", get("sim.channel_noise"), "8 comma-separated numbers");
    std::copy(v.begin(), v.end(), c.channel_noise_scale.begin());
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return c;
}

codec::AdcConfig RunConfig::adc_config() const {
  codec::AdcConfig a;
  a.vref = get_double("adc.vref");
  a.gain = static_cast<int>(get_int("adc.gain"));
  a.sample_rate = get_double("sim.fs");
  try {
    a.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return a;
}

dsp::PipelineConfig RunConfig::pipeline_config() const {
  dsp::PipelineConfig p;
  p.filter.prototype_order = get_size("filter.order");
  p.filter.order_is_overall = get_bool("filter.order_is_overall");
  p.filter.low_cut = get_double("filter.low_cut");
  p.filter.high_cut = get_double("filter.high_cut");
  p.filter.fs = get_double("sim.fs");
  p.zero_phase = get_bool("filter.zero_phase");
  p.settle_s = get_double("ica.settle");
  p.ica_enabled = get_bool("ica.enabled");
  p.ica.max_iter = get_size("ica.max_iter");
  p.ica.tol = get_double("ica.tol");
  p.ica.seed = static_cast<std::uint64_t>(get_size("ica.seed"));
  p.artifacts.kurtosis_threshold = get_double("ica.kurtosis_threshold");
  p.stft.window = get_size("stft.window");
  p.stft.hop = get_size("stft.hop");
  p.stft.nfft = get_size("stft.nfft");
  p.stft.first_bin = get_size("stft.first_bin");
  p.stft.n_bins = get_size("stft.bins");
  p.stft.n_frames = get_size("stft.frames");
  try {
    p.filter.validate();
    p.stft.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return p;
}

nn::ModelConfig RunConfig::model_config() const {
  nn::ModelConfig m;
  m.stem_channels = get_size("model.stem");
  try {
    m.stages = nn::parse_stages(get("model.stages"));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  m.cbam_enabled = get_bool("model.cbam");
  m.cbam_reduction = get_size("model.cbam_reduction");
  m.preactivation = get_bool("model.preactivation");
  m.spatial_kernel = get_size("model.spatial_kernel");
  m.fc_hidden = get_size("model.fc_hidden");
  m.bn_momentum = get_double("model.bn_momentum");
  m.bn_eps = get_double("model.bn_eps");
  try {
    m.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  return m;
}

harness::TrainConfig RunConfig::train_config() const {
  harness::TrainConfig t;
  t.epochs = get_size("train.epochs");
  t.batch_size = get_size("train.batch");
  t.optimizer.kind = get("train.optimizer");
  if (t.optimizer.kind != "adam" && t.optimizer.kind != "sgd") bad_value("train.optimizer", t.optimizer.kind, "adam or sgd");
  t.optimizer.lr = get_double("train.lr");
  t.optimizer.momentum = get_double("train.momentum");
  t.optimizer.weight_decay = get_double("train.weight_decay");
  t.best_snapshot = get_bool("train.best_snapshot");
  if (t.batch_size < 2) bad_value("train.batch", get("train.batch"), "at least 2");
  return t;
}

harness::DatasetConfig RunConfig::dataset_config() const {
  harness::DatasetConfig d;
  d.per_subject = get_size("data.per_subject");
  d.profile_perturbation = get_double("data.perturbation");
  d.lead_in_s = get_double("sim.lead_in");
  d.base = sim_config();
  d.adc = adc_config();
  d.pipeline = pipeline_config();
  return d;
}

net::ReceiveOptions RunConfig::receive_options() const {
  net::ReceiveOptions r;
  const std::int64_t port = get_int("net.port");
  if (port < 0 || port > 65535) bad_value("net.port", get("net.port"), "a port number");
  r.port = static_cast<std::uint16_t>(port);
  r.idle_timeout = std::chrono::milliseconds(get_int("net.idle_timeout_ms"));
  r.startup_timeout = std::chrono::milliseconds(get_int("net.startup_timeout_ms"));
  r.queue_capacity = get_size("net.queue");
  return r;
}

}  // namespace acpa::cli
