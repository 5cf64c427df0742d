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

#include "acpa/cli/app.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "acpa/cli/run_config.hpp"
#include "acpa/common/binary_io.hpp"
#include "acpa/common/error.hpp"
#include "acpa/harness/cross_validation.hpp"
#include "acpa/nn/checkpoint.hpp"
#include "acpa/sim/raw_file.hpp"
#include "acpa/sim/streaming.hpp"
#include "json.hpp"

namespace acpa::cli {

namespace {

// Options every subcommand understands.
struct Common {
  std::string config_file;
  std::vector<std::string> assignments;
  std::optional<std::uint64_t> seed;
  bool show_config = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_file, "key=value configuration file");
  sub->add_option("--set", c.assignments, "override one key (key=value); repeatable");
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_flag("--show-config", c.show_config, "print the effective configuration and its sources, then exit");
}

// defaults < file < flags. Named flags are applied after --set.
RunConfig resolve(const Common& c, const std::vector<std::pair<std::string, std::string>>& named) {
  RunConfig cfg;
  if (!c.config_file.empty()) cfg.load_file(c.config_file);
  for (const std::string& a : c.assignments) cfg.set_assignment(a);
  if (c.seed) cfg.set("seed", std::to_string(*c.seed), Source::Flag);
  for (const auto& [k, v] : named) cfg.set(k, v, Source::Flag);
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  io::write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<dsp::FeatureTensor> load_feature_files(const std::vector<std::string>& paths) {
  std::vector<dsp::FeatureTensor> all;
  for (const std::string& p : paths) {
    auto part = dsp::read_features(p);
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return all;
}

void require_labels(const std::vector<dsp::FeatureTensor>& data) {
  if (data.empty()) throw Error(ErrorCode::TooFewSamples, "no feature records");
  for (const auto& f : data)
    if (f.label >= kNumClasses) throw Error(ErrorCode::InvalidSpec, "feature records must be labelled for training");
}

std::vector<harness::Dataset> datasets_from(const RunConfig& cfg, const std::vector<std::string>& files,
                                            bool heterogeneous_default) {
  if (!files.empty()) {
    harness::Dataset d;
    d.samples = load_feature_files(files);
    d.subject_id = "S1";
    d.provenance = files.front();
    d.seed = cfg.seed();
    require_labels(d.samples);
    return {std::move(d)};
  }
  harness::DatasetConfig dc = cfg.dataset_config();
  bool user_set_noise = false;
  for (const ConfigEntry& e : cfg.entries())
    if (e.key == "sim.channel_noise") user_set_noise = e.source != Source::Default;
  if (heterogeneous_default && !user_set_noise) dc.base.channel_noise_scale = harness::heterogeneous_noise_scale();
  return harness::build_synthetic_dataset(cfg.get_size("data.subjects"), dc, cfg.seed());
}

std::string stats_text(const net::ReceiverStats& s, bool with_latency) {
  std::ostringstream os;
  os << "received " << s.received << "  lost " << s.lost << "  reordered " << s.reordered << "  duplicated "
     << s.duplicated << "  malformed " << s.malformed << "  overflow_dropped " << s.overflow_dropped << "  samples "
     << s.samples << '\n';
  if (with_latency)
    os << "latency_mean_us " << fmt("%.3f", s.latency_mean_us) << "  latency_max_us " << fmt("%.3f", s.latency_max_us)
       << '\n';
  return os.str();
}

// ------------------------------------------------------------------ simulate

int cmd_simulate(const RunConfig& cfg, const std::string& output, std::ostream& out) {
  const sim::SimConfig sc = cfg.sim_config();
  const sim::Session session = sim::generate_session(sc);
  const sim::RawCapture cap = sim::device_capture(session.signal, cfg.adc_config());
  sim::write_raw(output, cap);
  const auto events = sim::schedule_events(sc, cfg.pipeline_config().stft.epoch_length(), cfg.get_double("sim.lead_in"));
  sim::write_truth_sidecar(sim::sidecar_path(output), sc, session.truth, events);
  out << "wrote " << output << " (" << cap.samples.size() << " samples, class " << emotion_name(sc.label) << ", "
      << session.truth.blink_times.size() << " blinks, " << events.size() << " events)\n";
  return kExitOk;
}

// ------------------------------------------------------------------ stream

int cmd_stream(const RunConfig& cfg, const std::string& input, const std::string& dest_text, bool unpaced,
               std::ostream& out) {
  net::Endpoint dest{cfg.get("net.host"), static_cast<std::uint16_t>(cfg.get_int("net.port"))};
  if (!dest_text.empty()) dest = net::Endpoint::parse(dest_text);
  const double fs = cfg.get_double("sim.fs");
  const net::Pace pace = (!unpaced && cfg.get_bool("net.realtime")) ? net::Pace::realtime_at(fs) : net::Pace::unpaced();
  const std::size_t batch = cfg.get_size("net.batch");
  net::SendReport rep;
  if (!input.empty()) {
    rep = sim::replay_capture(sim::read_raw(input), dest, batch, pace);
  } else {
    rep = sim::stream_session(cfg.sim_config(), dest, batch, pace, cfg.adc_config());
  }
  out << "sent " << rep.packets << " packets, " << rep.samples << " samples to " << dest.host << ':' << dest.port
      << " in " << fmt("%.3f", rep.wall_seconds) << " s\n";
  return kExitOk;
}

// ------------------------------------------------------------------ capture

int cmd_capture(const RunConfig& cfg, const std::string& output, std::optional<std::uint64_t> max_packets,
                std::ostream& out) {
  net::ReceiveOptions ro = cfg.receive_options();
  ro.max_packets = max_packets;
  sim::RawCapture cap;
  cap.fs = cfg.get_double("sim.fs");
  // Records are stamped with their sample time in arrival order so that a
  // capture is reproducible; packet send times are only used for latency.
  const net::ReceiverStats stats = net::receive_loop(ro, [&](const net::StreamPacket& pkt) {
    for (const net::SampleFrame& s : pkt.samples) cap.append(sim::sample_time_us(cap.samples.size(), cap.fs), s);
  });
  sim::write_raw(output, cap);
  out << stats_text(stats, true);
  out << "wrote " << output << " (" << cap.samples.size() << " samples)\n";
  return kExitOk;
}

// ------------------------------------------------------------------ preprocess

int cmd_preprocess(const RunConfig& cfg, const std::string& input, const std::string& output, std::ostream& out) {
  const sim::RawCapture cap = sim::read_raw(input);
  const MultiChannel sig = cap.to_signal();
  const dsp::PipelineConfig pc = cfg.pipeline_config();
  std::vector<dsp::EventMark> events;
  const std::string side = sim::sidecar_path(input);
  if (std::filesystem::exists(side)) {
    for (const sim::Event& e : sim::read_truth_sidecar(side).events)
      events.push_back({e.sample, static_cast<std::uint8_t>(e.label)});
  } else {
    // No ground truth: unlabelled back-to-back epochs after the lead-in.
    const std::size_t len = pc.stft.epoch_length();
    for (auto s = static_cast<std::size_t>(std::llround(cfg.get_double("sim.lead_in") * cap.fs)); s + len <= sig.samples;
         s += len)
      events.push_back({s, kUnlabeled});
  }
  const dsp::SessionFeatures sf = dsp::preprocess_session(sig, events, pc);
  dsp::write_features(output, sf.features);
  out << "wrote " << output << " (" << sf.features.size() << " epochs of 8x" << pc.stft.n_bins << 'x'
      << pc.stft.n_frames << ", " << sf.skipped.size() << " skipped, removed components [";
  for (std::size_t i = 0; i < sf.removed_components.size(); ++i) out << (i ? "," : "") << sf.removed_components[i];
  out << "])\n";
  return kExitOk;
}

// ------------------------------------------------------------------ train / eval / ablate

std::string summary_json(const std::vector<harness::EvalReport>& reports) {
  nlohmann::ordered_json j;
  j["format"] = "acpa-cv-summary";
  j["version"] = 1;
  j["subjects"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) j["subjects"].push_back(nlohmann::ordered_json::parse(harness::report_json(r)));
  const auto s = harness::across_subjects(reports);
  j["across_subject_mean"] = s.mean;
  j["across_subject_std"] = s.std;
  return j.dump(2) + "\n";
}

int cmd_train(const RunConfig& cfg, const std::vector<std::string>& inputs, const std::string& output,
              const std::string& report_path, std::size_t subject, bool verbose, std::ostream& out) {
  const nn::ModelConfig mc = cfg.model_config();
  const harness::TrainConfig tc = cfg.train_config();
  const std::vector<harness::Dataset> data = datasets_from(cfg, inputs, false);
  if (subject >= data.size()) throw Error(ErrorCode::ConfigError, "--subject out of range");

  const std::size_t folds = cfg.get_size("train.folds");
  std::vector<harness::EvalReport> reports;
  if (folds >= 2) {
    harness::CvOptions opts;
    opts.k = folds;
    opts.train = tc;
    if (verbose)
      opts.on_fold = [&](std::size_t f, double acc) { out << "fold " << f << " accuracy " << fmt("%.4f", acc) << '\n'; };
    for (const auto& d : data) {
      reports.push_back(harness::cross_validate(mc, d, opts, cfg.seed()));
      out << harness::report_text(reports.back());
    }
    if (reports.size() > 1) {
      const auto s = harness::across_subjects(reports);
      out << "across subjects: mean " << fmt("%.4f", s.mean) << "  std " << fmt("%.4f", s.std) << '\n';
    }
    if (!report_path.empty()) write_text(report_path, summary_json(reports));
  }

  // Final model on every sample of the chosen subject; without a validation
  // set the last epoch is kept.
  harness::TrainConfig final_cfg = tc;
  final_cfg.best_snapshot = false;
  std::vector<std::size_t> all(data[subject].samples.size());
  std::iota(all.begin(), all.end(), 0);
  harness::FoldResult fr = harness::train_fold(mc, data[subject].samples, all, {}, final_cfg, cfg.seed());
  nn::checkpoint_save(fr.model, output);
  out << "wrote " << output << " (" << fr.model.parameter_count() << " parameters, final training loss "
      << fmt("%.4f", fr.train_loss.empty() ? 0.0 : fr.train_loss.back()) << ")\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint, const std::vector<std::string>& inputs,
             const std::string& report_path, std::ostream& out) {
  const nn::Model m = nn::checkpoint_load(checkpoint);
  const auto data = load_feature_files(inputs);
  require_labels(data);
  const harness::Evaluation ev = harness::evaluate(m, data);
  harness::EvalReport r;
  r.name = "eval";
  r.subject_id = inputs.front();
  r.confusion = ev.confusion;
  r.accuracy = ev.accuracy;
  r.per_fold_accuracies = {ev.accuracy};
  r.mean = ev.accuracy;
  r.seed = cfg.seed();
  r.total = data.size();
  r.model = m.config();
  r.train = cfg.train_config();
  out << harness::report_text(r);
  if (!report_path.empty()) write_text(report_path, harness::report_json(r));
  return kExitOk;
}

int cmd_ablate(const RunConfig& cfg, const std::vector<std::string>& inputs, const std::string& report_path,
               std::ostream& out) {
  const nn::ModelConfig mc = cfg.model_config();
  harness::CvOptions opts;
  opts.k = std::max<std::size_t>(2, cfg.get_size("train.folds"));
  opts.train = cfg.train_config();
  const auto data = datasets_from(cfg, inputs, true);
  nlohmann::ordered_json j;
  j["format"] = "acpa-ablation-summary";
  j["version"] = 1;
  j["subjects"] = nlohmann::ordered_json::array();
  for (const auto& d : data) {
    const harness::AblationReport rep = harness::ablation_study(mc, d, opts, cfg.seed());
    out << "subject " << d.subject_id << '\n' << harness::ablation_text(rep);
    j["subjects"].push_back(nlohmann::ordered_json::parse(harness::ablation_json(rep)));
  }
  if (!report_path.empty()) write_text(report_path, j.dump(2) + "\n");
  return kExitOk;
}

// ------------------------------------------------------------------ infer

void print_prediction(const nn::Model& m, const dsp::FeatureTensor& f, std::ostream& out) {
  const std::vector<std::size_t> idx{0};
  const nn::Tensor logits = m.predict(harness::make_batch(std::span(&f, 1), idx));
  const nn::Tensor p = nn::softmax(logits);
  std::size_t best = 0;
  for (std::size_t j = 1; j < kNumClasses; ++j)
    if (p[j] > p[best]) best = j;
  out << f.timestamp_us << '\t' << emotion_name(static_cast<EmotionLabel>(best)) << '\t';
  for (std::size_t j = 0; j < kNumClasses; ++j) out << (j ? " " : "") << fmt("%.6f", p[j]);
  out << '\n';
  out.flush();
}

int cmd_infer(const RunConfig& cfg, const std::string& checkpoint, const std::string& from_file,
              std::optional<std::uint64_t> max_packets, std::ostream& out, std::ostream& err) {
  const nn::Model m = nn::checkpoint_load(checkpoint);
  const double fs = cfg.get_double("sim.fs");
  dsp::StreamingPipeline pipe(cfg.pipeline_config(), fs, cfg.get_double("ica.fit_seconds"));
  std::size_t sample_index = 0;
  std::vector<double> buf(sim::kChannels);
  // Timestamps are sample times (arrival order), as in capture files.
  auto feed = [&](const net::SampleFrame& s) {
    std::copy(s.begin(), s.end(), buf.begin());
    if (auto f = pipe.push(buf, sim::sample_time_us(sample_index++, fs))) print_prediction(m, *f, out);
  };
  if (!from_file.empty()) {
    for (const auto& s : sim::read_raw(from_file).samples) feed(s);
    return kExitOk;
  }
  net::ReceiveOptions ro = cfg.receive_options();
  ro.max_packets = max_packets;
  const net::ReceiverStats stats = net::receive_loop(ro, [&](const net::StreamPacket& pkt) {
    for (const auto& s : pkt.samples) feed(s);
  });
  err << stats_text(stats, true);
  return kExitOk;
}

// ------------------------------------------------------------------ bench-net

int cmd_bench(const RunConfig& cfg, const std::string& report_path, std::ostream& out) {
  const sim::SimConfig sc = cfg.sim_config();
  const sim::RawCapture cap = sim::device_capture(sim::generate_session(sc).signal, cfg.adc_config());
  net::ReceiveOptions ro = cfg.receive_options();
  ro.bind_host = "127.0.0.1";
  ro.port = 0;
  net::Receiver rx(ro);
  const std::size_t batch = cfg.get_size("net.batch");
  const net::Pace pace = cfg.get_bool("net.realtime") ? net::Pace::realtime_at(sc.fs) : net::Pace::unpaced();
  net::SendReport sent;
  std::thread sender([&] { sent = net::send_stream({"127.0.0.1", rx.port()}, cap.samples, batch, pace); });
  const net::ReceiverStats stats = rx.run([](const net::StreamPacket&) {});
  sender.join();
  out << "sent " << sent.packets << " packets (" << sent.samples << " samples, batch " << batch << ") in "
      << fmt("%.3f", sent.wall_seconds) << " s\n";
  out << stats_text(stats, true);
  if (!report_path.empty()) {
    nlohmann::ordered_json j;
    j["format"] = "acpa-bench-net";
    j["version"] = 1;
    j["packets_sent"] = sent.packets;
    j["samples_sent"] = sent.samples;
    j["batch"] = batch;
    j["received"] = stats.received;
    j["lost"] = stats.lost;
    j["reordered"] = stats.reordered;
    j["duplicated"] = stats.duplicated;
    j["malformed"] = stats.malformed;
    j["latency_mean_us"] = stats.latency_mean_us;
    j["latency_max_us"] = stats.latency_max_us;
    write_text(report_path, j.dump(2) + "\n");
  }
  return stats.lost == 0 && stats.duplicated == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EEG acquisition, preprocessing and emotion classification", "acpa-eeg"};
  app.require_subcommand(1);

  Common c;
  std::string output, input, checkpoint, dest, report, from;
  std::vector<std::string> inputs;
  std::optional<std::string> cls;
  std::optional<double> duration;
  std::optional<std::uint16_t> port;
  std::optional<std::uint64_t> max_packets;
  std::size_t subject = 0;
  bool unpaced = false, live = false, verbose = false;

  auto* simulate = app.add_subcommand("simulate", "simulate a session and write a raw capture file");
  simulate->add_option("--class", cls, "class profile");
  simulate->add_option("--duration", duration, "session length (s)");
  simulate->add_option("-o,--output", output, "raw file to write");

  auto* stream = app.add_subcommand("stream", "send a raw file (or a live simulated session) over UDP");
  stream->add_option("input", input, "raw file; omit with --live");
  stream->add_flag("--live", live, "simulate the session instead of reading a file");
  stream->add_option("--dest", dest, "host:port");
  stream->add_flag("--unpaced", unpaced, "send as fast as possible");
  stream->add_option("--class", cls, "class profile (--live)");
  stream->add_option("--duration", duration, "session length (s) (--live)");

  auto* capture = app.add_subcommand("capture", "receive a UDP stream into a raw file");
  capture->add_option("-o,--output", output, "raw file to write");
  capture->add_option("--port", port, "UDP port");
  capture->add_option("--max-packets", max_packets, "stop after this many packets");

  auto* preprocess = app.add_subcommand("preprocess", "raw file to feature file");
  preprocess->add_option("input", input, "raw file");
  preprocess->add_option("-o,--output", output, "feature file to write");

  auto* train = app.add_subcommand("train", "cross-validate and train a model");
  train->add_option("inputs", inputs, "feature files (omit to build the synthetic dataset)");
  train->add_option("-o,--output", output, "checkpoint to write");
  train->add_option("--report", report, "structured report file");
  train->add_option("--subject", subject, "synthetic subject whose data trains the checkpoint");
  train->add_flag("-v,--verbose", verbose, "print per-fold progress");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on feature files");
  eval->add_option("checkpoint", checkpoint, "checkpoint file");
  eval->add_option("inputs", inputs, "feature files");
  eval->add_option("--report", report, "structured report file");

  auto* infer = app.add_subcommand("infer", "classify a live UDP stream, one line per epoch");
  infer->add_option("checkpoint", checkpoint, "checkpoint file");
  infer->add_option("--port", port, "UDP port");
  infer->add_option("--from", from, "read samples from a raw file instead of the network");
  infer->add_option("--max-packets", max_packets, "stop after this many packets");

  auto* bench = app.add_subcommand("bench-net", "loopback transport benchmark");
  bench->add_option("--duration", duration, "stream length (s)");
  bench->add_flag("--unpaced", unpaced, "send as fast as possible");
  bench->add_option("--report", report, "structured report file");

  auto* ablate = app.add_subcommand("ablate", "ablation study (full model, attention off, post-activation)");
  ablate->add_option("inputs", inputs, "feature files (omit for the heterogeneous-noise synthetic dataset)");
  ablate->add_option("--report", report, "structured report file");

  for (CLI::App* sub : app.get_subcommands({})) add_common(sub, c);

  if (args.size() <= 1) {
    err << app.help();
    return kExitUsage;
  }
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::vector<std::pair<std::string, std::string>> named;
  if (cls) named.emplace_back("sim.class", *cls);
  if (duration) named.emplace_back("sim.duration", fmt("%.17g", *duration));
  if (port) named.emplace_back("net.port", std::to_string(*port));
  if (unpaced) named.emplace_back("net.realtime", "false");

  RunConfig cfg;
  try {
    cfg = resolve(c, named);
    // Surface malformed values as usage errors before any work starts.
    (void)cfg.sim_config();
    (void)cfg.pipeline_config();
    (void)cfg.model_config();
    (void)cfg.train_config();
    (void)cfg.receive_options();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (c.show_config) {
    out << cfg.show();
    return kExitOk;
  }

  // Checked here rather than by the parser so that --show-config works alone.
  auto missing = [&](const std::string& what) {
    err << "error: " << what << " is required\n";
    return kExitUsage;
  };
  const bool needs_output = simulate->parsed() || capture->parsed() || preprocess->parsed() || train->parsed();
  if (needs_output && output.empty()) return missing("--output");
  if (preprocess->parsed() && input.empty()) return missing("input");
  if ((eval->parsed() || infer->parsed()) && checkpoint.empty()) return missing("checkpoint");
  if (eval->parsed() && inputs.empty()) return missing("a feature file");

  try {
    if (simulate->parsed()) return cmd_simulate(cfg, output, out);
    if (stream->parsed()) {
      if (input.empty() == !live) {
        err << "error: stream needs either an input file or --live\n";
        return kExitUsage;
      }
      return cmd_stream(cfg, input, dest, unpaced, out);
    }
    if (capture->parsed()) return cmd_capture(cfg, output, max_packets, out);
    if (preprocess->parsed()) return cmd_preprocess(cfg, input, output, out);
    if (train->parsed()) return cmd_train(cfg, inputs, output, report, subject, verbose, out);
    if (eval->parsed()) return cmd_eval(cfg, checkpoint, inputs, report, out);
    if (infer->parsed()) return cmd_infer(cfg, checkpoint, from, max_packets, out, err);
    if (bench->parsed()) return cmd_bench(cfg, report, out);
    if (ablate->parsed()) return cmd_ablate(cfg, inputs, report, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigError ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace acpa::cli
