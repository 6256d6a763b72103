// tools/yoho_cli.cpp

// Copyright 2026 The yoho-sed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// yoho_cli: synth-data, extract-features, train, predict, evaluate, bench.
// Exit codes: 0 ok, 1 usage error, 2 data error, 3 model mismatch.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "yoho/yoho.hpp"

namespace fs = std::filesystem;
using namespace yoho;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kMismatch = 3 };

struct Common {
  std::string profile;
  double clip_window = 0.0;  // 0 = profile default
  std::size_t threads = 0;

  std::optional<PipelineProfile> resolve(const std::string& fallback = "music-speech") const {
    const std::string name = profile.empty() ? fallback : profile;
    std::optional<double> w;
    if (clip_window > 0.0) w = clip_window;
    return profile_by_name(name, w);
  }
};

void add_profile_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--profile", c.profile, "music-speech or environmental");
  cmd->add_option("--clip-window", c.clip_window, "environmental window: 2.56 or 10 seconds");
}

/// Manifest paths are taken as written, falling back to the manifest's folder.
fs::path resolve_near(const fs::path& p, const fs::path& manifest) {
  if (p.is_absolute() || fs::exists(p)) return p;
  return manifest.parent_path() / p;
}

std::vector<fs::path> collect_inputs(const std::vector<std::string>& args, const std::string& manifest) {
  std::vector<fs::path> out(args.begin(), args.end());
  if (!manifest.empty())
    for (const auto& e : read_manifest(manifest)) out.push_back(resolve_near(e.wav, manifest));
  return out;
}

MelSpectrogram features_for(const fs::path& wav, const PipelineProfile& p, const std::string& cache_dir) {
  const fs::path cached = cache_dir.empty() ? fs::path(wav).replace_extension(".ymel")
                                            : fs::path(cache_dir) / wav.filename().replace_extension(".ymel");
  if (fs::exists(cached)) {
    MelSpectrogram m = load_features(cached);
    if (m.config == p.features) return m;
    std::cerr << "note: ignoring " << cached.string() << " (different front end)\n";
  }
  return log_mel(prepare_audio(load_wav(wav), p), p.features);
}

// ---------------------------------------------------------------- synth-data

struct SynthArgs {
  std::string out;
  std::size_t clips = 10;
  std::uint64_t seed = 0, first_index = 0;
  double clip_duration = 8.0;
  std::size_t min_events = 1, max_events = 4;
  bool no_overlap = false;
};

int cmd_synth(const SynthArgs& a, const Common& c) {
  const auto p = c.resolve();
  if (p->name != "music-speech") throw ArgumentError("synth-data generates the two music-speech classes only");
  SynthConfig cfg;
  cfg.seed = a.seed;
  cfg.clip_duration = a.clip_duration;
  cfg.sample_rate = p->features.sample_rate;
  cfg.min_events = a.min_events;
  cfg.max_events = a.max_events;
  cfg.overlap_allowed = !a.no_overlap;
  cfg.max_duration = std::min(cfg.max_duration, cfg.clip_duration);
  cfg.min_duration = std::min(cfg.min_duration, cfg.max_duration);
  auto m = synth_dataset(cfg, a.clips, a.out, a.first_index);
  std::cout << "clips=" << m.size() << "\nmanifest=" << (fs::path(a.out) / "manifest.tsv").string() << "\n";
  return kOk;
}

// ---------------------------------------------------------- extract-features

struct ExtractArgs {
  std::vector<std::string> inputs;
  std::string manifest, out;
};

int cmd_extract(const ExtractArgs& a, const Common& c) {
  const auto p = c.resolve();
  const auto files = collect_inputs(a.inputs, a.manifest);
  if (files.empty()) throw ArgumentError("extract-features: no input files");
  if (!a.out.empty()) fs::create_directories(a.out);
  parallel_for(files.size(), [&](std::size_t i) {
    const fs::path dst = a.out.empty() ? fs::path(files[i]).replace_extension(".ymel")
                                       : fs::path(a.out) / files[i].filename().replace_extension(".ymel");
    save_features(dst, log_mel(prepare_audio(load_wav(files[i]), *p), p->features));
  });
  std::cout << "files=" << files.size() << "\n";
  return kOk;
}

// --------------------------------------------------------------------- train

struct TrainArgs {
  std::string train_manifest, val_manifest, out, cache_dir, model = "yoho";
  std::size_t width_divisor = 1, epochs = 100, patience = 5, batch_size = 32;
  double lr = 1e-3, l2_first = 0.0, l2_rest = 0.0, dropout = 0.0;
  std::size_t time_masks = 0, freq_masks = 0, max_time_width = 0, max_freq_width = 0;
  std::uint64_t seed = 0;
};

std::vector<Example> load_examples(const std::string& manifest, const Network<float>& net, const PipelineProfile& p,
                                   const std::string& cache_dir) {
  const auto entries = read_manifest(manifest);
  std::vector<std::vector<Example>> per_file(entries.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    const fs::path wav = resolve_near(entries[i].wav, manifest), tsv = resolve_near(entries[i].tsv, manifest);
    per_file[i] = window_examples(slice_windows(features_for(wav, p, cache_dir), p), read_events_tsv(tsv), net, p,
                                  p.classes);
  });
  std::vector<Example> out;
  for (auto& v : per_file)
    for (auto& e : v) out.push_back(std::move(e));
  return out;
}

int cmd_train(const TrainArgs& a, const Common& c) {
  const auto p = c.resolve();
  const ModelKind kind = parse_model_kind(a.model);
  if (kind == ModelKind::kCustom) throw ArgumentError("--model must be yoho or frame_cnn");
  Architecture arch{kind, p->window_frames(), static_cast<std::size_t>(p->features.n_mels), p->classes.size(),
                    a.width_divisor, a.seed, p->classes};
  Network<float> net = build_network(arch);
  Metadata meta{{"profile", p->name}, {"clip_window", std::to_string(p->clip_window)}};
  if (a.epochs > 0) {
    if (a.train_manifest.empty() || a.val_manifest.empty())
      throw ArgumentError("train: --train and --val manifests are required");
    const auto tr = load_examples(a.train_manifest, net, *p, a.cache_dir);
    const auto va = load_examples(a.val_manifest, net, *p, a.cache_dir);
    std::cout << "train_windows=" << tr.size() << " val_windows=" << va.size()
              << " parameters=" << net.parameter_count() << std::endl;
    TrainConfig cfg;
    cfg.learning_rate = a.lr;
    cfg.batch_size = a.batch_size;
    cfg.l2_first_conv = a.l2_first;
    cfg.l2_rest = a.l2_rest;
    cfg.spatial_dropout_rate = a.dropout;
    cfg.early_stop_patience = a.patience;
    cfg.max_epochs = a.epochs;
    cfg.seed = a.seed;
    cfg.spec_augment = {a.time_masks, a.freq_masks, a.max_time_width, a.max_freq_width};
    TrainHistory h = train(net, tr, va, cfg, [](const EpochStats& e) {
      std::printf("epoch=%zu train_loss=%.6f val_loss=%.6f%s\n", e.epoch, e.train_loss, e.val_loss,
                  e.improved ? " *" : "");
      std::fflush(stdout);
    });
    meta["best_epoch"] = std::to_string(h.best_epoch);
    meta["best_val_loss"] = std::to_string(h.best_val_loss);
  }
  save_checkpoint(a.out, net, meta);
  std::cout << "saved=" << a.out << "\n";
  return kOk;
}

// ------------------------------------------------------------------- predict

struct PredictArgs {
  std::string model, out;
  std::vector<std::string> inputs;
  double threshold = kDefaultPresenceThreshold;
  bool no_smoothing = false;
};

PipelineProfile profile_for_model(const LoadedModel& m, const Common& c) {
  auto it = m.metadata.find("profile");
  const std::string stored = it == m.metadata.end() ? "" : it->second;
  if (!c.profile.empty() && !stored.empty() && c.profile != stored)
    throw ModelMismatchError("model was trained for the " + stored + " profile, not " + c.profile);
  Common resolved = c;
  if (resolved.clip_window <= 0.0 && m.metadata.count("clip_window"))
    resolved.clip_window = std::stod(m.metadata.at("clip_window"));
  PipelineProfile p = *resolved.resolve(stored.empty() ? "music-speech" : stored);
  check_model_profile(m.net, p);
  return p;
}

int cmd_predict(const PredictArgs& a, const Common& c) {
  LoadedModel m = load_checkpoint(a.model);
  const PipelineProfile p = profile_for_model(m, c);
  if (a.inputs.empty()) throw ArgumentError("predict: no input files");
  fs::create_directories(a.out);
  // One network per worker; files are split between them.
  const std::size_t workers = std::min(num_threads(), a.inputs.size());
  std::vector<Network<float>> nets;
  for (std::size_t w = 0; w < workers; ++w) {
    nets.push_back(build_network(m.net.architecture()));
    nets.back().copy_weights_from(m.net);
  }
  parallel_for(workers, [&](std::size_t w) {
    for (std::size_t i = w; i < a.inputs.size(); i += workers) {
      const fs::path in = a.inputs[i];
      EventList ev = predict_events(nets[w], prepare_audio(load_wav(in), p), p, a.threshold, !a.no_smoothing);
      write_events_tsv(fs::path(a.out) / in.filename().replace_extension(".tsv"), ev);
    }
  });
  std::cout << "files=" << a.inputs.size() << "\n";
  return kOk;
}

// ------------------------------------------------------------------ evaluate

struct EvaluateArgs {
  std::string ref, est;
  double segment_size = 0.0;
  bool json = false;
};

int cmd_evaluate(const EvaluateArgs& a, const Common& c) {
  const auto p = c.resolve();
  const double seg = a.segment_size > 0.0 ? a.segment_size : p->segment_size;
  Evaluation ev = evaluate_dirs(a.ref, a.est, seg);
  if (a.json)
    std::cout << report_to_json(ev.report).dump(2) << "\n";
  else
    std::cout << report_to_text(ev.report);
  for (const auto& u : ev.unmatched) std::cerr << "unmatched: " << u << "\n";
  return ev.unmatched.empty() ? kOk : kData;
}

// --------------------------------------------------------------------- bench

struct BenchArgs {
  std::string yoho_model, frame_model;
  std::vector<std::string> inputs;
  double synth_hours = 0.0, threshold = kDefaultPresenceThreshold;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

int cmd_bench(const BenchArgs& a, const Common& c) {
  LoadedModel y = load_checkpoint(a.yoho_model), f = load_checkpoint(a.frame_model);
  const PipelineProfile p = profile_for_model(y, c);
  if (y.net.architecture().kind != ModelKind::kYoho || f.net.architecture().kind != ModelKind::kFrameCnn)
    throw ModelMismatchError("bench: need a yoho model and a frame_cnn model");
  std::vector<AudioBuffer> corpus;
  for (const auto& in : a.inputs) corpus.push_back(prepare_audio(load_wav(in), p));
  if (a.synth_hours > 0.0) {
    if (p.name != "music-speech") throw ArgumentError("bench: --synth-hours needs the music-speech profile");
    SynthConfig cfg;
    cfg.seed = a.seed;
    const auto clips = static_cast<std::size_t>(std::ceil(a.synth_hours * 3600.0 / cfg.clip_duration));
    for (std::size_t i = 0; i < clips; ++i) corpus.push_back(synth_clip(cfg, i).audio);
  }
  if (corpus.empty()) throw ArgumentError("bench: give input files or --synth-hours");
  std::cout << bench_to_text(bench(y.net, f.net, corpus, p, a.threshold, a.batch_size));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"YOHO sound event detection"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "worker threads (default: YOHO_NUM_THREADS or all cores)");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth-data", "write synthetic WAV + TSV clips and a manifest");
  add_profile_flags(s, common);
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--clips", synth.clips, "number of clips");
  s->add_option("--seed", synth.seed, "generator seed");
  s->add_option("--first-index", synth.first_index, "index of the first clip");
  s->add_option("--clip-duration", synth.clip_duration, "seconds per clip");
  s->add_option("--min-events", synth.min_events, "fewest events per clip");
  s->add_option("--max-events", synth.max_events, "most events per clip");
  s->add_flag("--no-overlap", synth.no_overlap, "forbid overlap between classes");

  ExtractArgs extract;
  auto* x = app.add_subcommand("extract-features", "cache log-mel features (.ymel) for WAV files");
  add_profile_flags(x, common);
  x->add_option("inputs", extract.inputs, "WAV files");
  x->add_option("--manifest", extract.manifest, "manifest of wav<TAB>tsv lines");
  x->add_option("--out", extract.out, "output directory (default: next to each WAV)");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "train a model from manifests");
  add_profile_flags(t, common);
  t->add_option("--train", tr.train_manifest, "training manifest");
  t->add_option("--val", tr.val_manifest, "validation manifest");
  t->add_option("--out", tr.out, "checkpoint path")->required();
  t->add_option("--model", tr.model, "yoho or frame_cnn");
  t->add_option("--width-divisor", tr.width_divisor, "divide every channel count (1 = full width)");
  t->add_option("--epochs", tr.epochs, "epoch cap (0 writes the initial weights)");
  t->add_option("--patience", tr.patience, "early-stopping patience");
  t->add_option("--batch-size", tr.batch_size, "mini-batch size");
  t->add_option("--lr", tr.lr, "Adam learning rate");
  t->add_option("--l2-first", tr.l2_first, "L2 coefficient on the first conv kernel");
  t->add_option("--l2-rest", tr.l2_rest, "L2 coefficient on later conv kernels");
  t->add_option("--dropout", tr.dropout, "spatial dropout rate");
  t->add_option("--time-masks", tr.time_masks, "SpecAugment time masks per batch");
  t->add_option("--freq-masks", tr.freq_masks, "SpecAugment frequency masks per batch");
  t->add_option("--max-time-width", tr.max_time_width, "widest time mask in frames");
  t->add_option("--max-freq-width", tr.max_freq_width, "widest frequency mask in mel bins");
  t->add_option("--features-dir", tr.cache_dir, "where cached .ymel files live (default: next to each WAV)");
  t->add_option("--seed", tr.seed, "initialisation, shuffling and dropout seed");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "write event TSVs for WAV files");
  add_profile_flags(p, common);
  p->add_option("--model", pr.model, "checkpoint")->required();
  p->add_option("inputs", pr.inputs, "WAV files")->required();
  p->add_option("--out", pr.out, "output directory")->required();
  p->add_option("--threshold", pr.threshold, "presence threshold");
  p->add_flag("--no-smoothing", pr.no_smoothing, "skip the profile's smoothing");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "segment-based metrics over matching TSV files");
  add_profile_flags(e, common);
  e->add_option("--ref", ev.ref, "reference TSV directory")->required();
  e->add_option("--est", ev.est, "estimated TSV directory")->required();
  e->add_option("--segment-size", ev.segment_size, "segment length in seconds (default: profile)");
  e->add_flag("--json", ev.json, "JSON instead of key=value lines");

  BenchArgs bn;
  auto* b = app.add_subcommand("bench", "time YOHO against the frame-classification head");
  add_profile_flags(b, common);
  b->add_option("--yoho", bn.yoho_model, "YOHO checkpoint")->required();
  b->add_option("--frame", bn.frame_model, "frame_cnn checkpoint")->required();
  b->add_option("inputs", bn.inputs, "WAV files");
  b->add_option("--synth-hours", bn.synth_hours, "add this many hours of synthetic audio");
  b->add_option("--threshold", bn.threshold, "presence threshold");
  b->add_option("--batch-size", bn.batch_size, "windows per forward pass");
  b->add_option("--seed", bn.seed, "synthetic corpus seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  ScopedThreadCount pin(common.threads);
  try {
    if (s->parsed()) return cmd_synth(synth, common);
    if (x->parsed()) return cmd_extract(extract, common);
    if (t->parsed()) return cmd_train(tr, common);
    if (p->parsed()) return cmd_predict(pr, common);
    if (e->parsed()) return cmd_evaluate(ev, common);
    if (b->parsed()) return cmd_bench(bn, common);
  } catch (const ModelMismatchError& err) {
    std::cerr << "model mismatch: " << err.what() << "\n";
    return kMismatch;
  } catch (const ArgumentError& err) {
    std::cerr << "usage: " << err.what() << "\n";
    return kUsage;
  } catch (const std::filesystem::filesystem_error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kData;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kData;
  }
  return kUsage;
}
