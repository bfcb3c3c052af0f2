// Copyright 2026 The sbtts Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Command-line front end: decomposition, training, synthesis, evaluation
// and plotting.
//
// Exit codes: 0 ok, 1 usage or configuration, 2 data, 3 numerical.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sbtts/audio.hpp"
#include "sbtts/checkpoint.hpp"
#include "sbtts/config.hpp"
#include "sbtts/fixture.hpp"
#include "sbtts/metrics.hpp"
#include "sbtts/model.hpp"
#include "sbtts/parallel.hpp"
#include "sbtts/synthesis.hpp"
#include "sbtts/textfront.hpp"
#include "sbtts/trainer.hpp"
#include "sbtts/wavelet.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sbtts::cli {
namespace {

struct Globals {
  unsigned threads = 1;
  bool threads_set = false;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IngestionError(path.string() + ": " + e.what());
  }
}

void print_snr(std::ostream& out, const metrics::SnrPair& snr) {
  out << std::fixed << std::setprecision(2) << "snr_conv_db " << snr.conventional_db << '\n'
      << "snr_energy_db " << snr.energy_ratio_db << '\n';
  out.unsetf(std::ios::fixed);
}

// ---------------------------------------------------------------- decompose

struct DecomposeArgs {
  std::string wav;
  int levels = 8;
  int order = 10;
  std::string out;
  std::string format = "raw";
};

int run_decompose(const DecomposeArgs& a) {
  const auto w = audio::read_wav(a.wav);
  const auto filters = wavelet::db_filters(a.order);
  const auto set = wavelet::analyze(w.samples, a.levels, filters);
  const fs::path prefix = a.out.empty() ? fs::path(a.wav).replace_extension("") : fs::path(a.out);
  std::vector<std::vector<double>> streams(set.details.begin(), set.details.end());
  streams.push_back(set.approximation);

  fs::path data = prefix;
  if (a.format == "raw") {
    data += ".f64";
    std::string bytes;
    bytes.reserve(streams.size() * w.samples.size() * 8);
    for (const auto& s : streams) {
      for (double v : s) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>(bits >> (8 * i)));
      }
    }
    write_text(data, bytes);
  } else {
    data += ".subbands.wav";
    audio::write_wav_multichannel(data, streams, w.sample_rate);
  }
  const json sidecar{{"source", fs::absolute(a.wav).string()},
                     {"sample_rate", w.sample_rate},
                     {"length", w.samples.size()},
                     {"levels", a.levels},
                     {"order", a.order},
                     {"format", a.format},
                     {"data", data.filename().string()},
                     {"streams", streams.size()}};
  fs::path side = prefix;
  side += ".json";
  write_text(side, sidecar.dump(2) + "\n");
  std::cout << "wrote " << streams.size() << " streams of " << w.samples.size() << " samples to "
            << data.string() << " (sidecar " << side.string() << ")\n";
  return 0;
}

// -------------------------------------------------------------- reconstruct

struct ReconstructArgs {
  std::string sidecar;
  std::string out;
  std::string reference;
  bool float_output = false;
};

int run_reconstruct(const ReconstructArgs& a) {
  const json side = read_json(a.sidecar);
  wavelet::SubbandSet set;
  std::size_t n = 0;
  int rate = 16000;
  std::string source;
  fs::path data;
  std::string format;
  int order = 0;
  try {
    set.levels = side.at("levels").get<int>();
    order = side.at("order").get<int>();
    n = side.at("length").get<std::size_t>();
    rate = side.at("sample_rate").get<int>();
    source = side.value("source", std::string());
    format = side.at("format").get<std::string>();
    data = fs::path(a.sidecar).parent_path() / side.at("data").get<std::string>();
  } catch (const json::exception& e) {
    throw IngestionError(a.sidecar + ": " + e.what());
  }
  const std::size_t count = static_cast<std::size_t>(set.levels) + 1;
  std::vector<std::vector<double>> streams;
  if (format == "raw") {
    const std::string bytes = audio::detail::read_file(data);
    if (bytes.size() != count * n * 8) {
      throw IngestionError(data.string() + ": expected " + std::to_string(count * n * 8) +
                           " bytes, found " + std::to_string(bytes.size()));
    }
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    streams.assign(count, std::vector<double>(n));
    for (std::size_t s = 0; s < count; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(p[(s * n + i) * 8 + b]) << (8 * b);
        streams[s][i] = std::bit_cast<double>(bits);
      }
    }
  } else {
    streams = audio::read_wav_multichannel(data).channels;
    if (streams.size() != count) throw IngestionError(data.string() + ": wrong stream count");
  }
  set.approximation = streams.back();
  streams.pop_back();
  set.details = std::move(streams);
  const auto y = wavelet::synthesize(set, wavelet::db_filters(order));

  const std::string ref = a.reference.empty() ? source : a.reference;
  if (!ref.empty() && fs::exists(ref)) {
    const auto x = audio::read_wav(ref);
    print_snr(std::cout, metrics::snr_db(x.samples, y));
  }
  if (!a.out.empty()) {
    audio::write_wav(a.out, y, rate,
                     a.float_output ? audio::SampleFormat::kFloat32 : audio::SampleFormat::kPcm16);
  }
  return 0;
}

// ----------------------------------------------------------------- datasets

struct LoadedEntry {
  config::ManifestEntry entry;
  audio::Waveform wave;
};

std::vector<LoadedEntry> load_split(const std::vector<config::ManifestEntry>& entries,
                                    config::Split split) {
  std::vector<LoadedEntry> out;
  for (const auto& e : entries) {
    if (e.split != split) continue;
    out.push_back({e, audio::read_wav(e.wav_path)});
  }
  return out;
}

std::vector<double> fit_gains_on(const ModelSpec& spec, const std::vector<LoadedEntry>& train) {
  if (train.empty()) throw IngestionError("no training entries to fit gains on");
  std::vector<Signal> corpus;
  for (const auto& t : train) corpus.push_back(t.wave.samples);
  return fit_corpus_gains(StreamCodec(spec), corpus);
}

std::optional<text::PronunciationDictionary> maybe_dictionary(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return text::PronunciationDictionary::load(path);
}

// ---------------------------------------------------------------- fit-gains

struct FitGainsArgs {
  std::string manifest;
  std::string config;
  int levels = 8;
  int order = 10;
  std::string out = "gains.json";
};

int run_fit_gains(const FitGainsArgs& a) {
  ModelSpec spec;
  if (!a.config.empty()) {
    spec = config::load_run_config(a.config).model;
  } else {
    spec.levels = a.levels;
    spec.wavelet_order = a.order;
  }
  const auto train = load_split(config::load_manifest(a.manifest), config::Split::kTrain);
  const auto gains = fit_gains_on(spec, train);
  const json j{{"levels", spec.levels}, {"order", spec.wavelet_order},
               {"fullband", spec.fullband}, {"gains", gains}};
  write_text(a.out, j.dump(2) + "\n");
  std::cout << "fit " << gains.size() << " gains on " << train.size() << " utterances:";
  for (double g : gains) std::cout << ' ' << g;
  std::cout << '\n';
  return 0;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::string gains;
  std::int64_t max_iters = 0;
  std::string out;
};

int run_train(const TrainArgs& a, const Globals& g) {
  config::RunConfig rc = config::load_run_config(a.config);
  if (a.max_iters > 0) rc.train.max_iters = a.max_iters;
  if (g.threads_set) rc.train.threads = g.threads;
  if (rc.paths.manifest.empty()) throw ConfigError("config has no paths.manifest");
  const fs::path out_dir = a.out.empty() ? fs::path(rc.paths.output_dir) : fs::path(a.out);
  fs::create_directories(out_dir);

  const auto entries = config::load_manifest(rc.paths.manifest);
  const auto train = load_split(entries, config::Split::kTrain);
  if (train.empty()) throw IngestionError("manifest has no training entries");
  ModelSpec spec = rc.model;
  if (!a.gains.empty()) {
    const json gj = read_json(a.gains);
    spec.gains = gj.at("gains").get<std::vector<double>>();
  } else {
    spec.gains = fit_gains_on(spec, train);
  }
  spec.validate();

  const auto dict = maybe_dictionary(rc.paths.dictionary);
  const StreamCodec codec(spec);
  std::vector<train::TrainingUtterance> data;
  for (const auto& t : train) {
    const auto track = config::conditioning_track(t.entry, t.wave.samples.size(), spec,
                                                  dict ? &*dict : nullptr);
    data.push_back(train::make_training_utterance(codec, t.entry.id, t.wave.samples, track));
  }

  ckpt::Checkpoint c;
  c.spec = spec;
  c.train_config = rc.train;
  c.model = SubbandModel<double>::random(spec, rc.train.seed);
  train::Trainer<double> trainer(spec, c.model, rc.train, std::move(data));

  std::ofstream log(out_dir / "train_log.csv");
  if (!log) throw IoError("cannot write " + (out_dir / "train_log.csv").string());
  train::write_log_header(log, spec.stream_count());
  const auto snapshot = [&](const fs::path& path) {
    c.iteration = trainer.iteration();
    c.loss_digest = train::loss_digest(trainer.loss_history());
    ckpt::save(path, c);
  };
  const auto start = std::chrono::steady_clock::now();
  trainer.run([&](std::int64_t it, double lr, const train::LossBreakdown& loss) {
    if (it % rc.train.log_every == 0 || it == rc.train.max_iters) {
      train::write_log_row(log, it, lr, loss);
      log.flush();
    }
    if (rc.train.checkpoint_every > 0 && it % rc.train.checkpoint_every == 0) {
      snapshot(out_dir / ("ckpt_" + std::to_string(it) + ".ckpt"));
    }
  });
  snapshot(out_dir / "model.ckpt");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto& hist = trainer.loss_history();
  std::cout << "trained " << trainer.iteration() << " iterations in " << secs << " s, final loss "
            << hist.back() << " (mean per stream "
            << hist.back() / static_cast<double>(spec.stream_count()) << "), checkpoint "
            << (out_dir / "model.ckpt").string() << '\n';
  return 0;
}

// -------------------------------------------------------------------- synth

struct SynthArgs {
  std::string checkpoint;
  std::string mode = "free";
  std::string text;
  std::string alignment;
  std::string dictionary;
  std::string reference;
  double seconds = 0.0;
  std::string sampler = "categorical";
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::string out = "out.wav";
};

fastgen::SamplerSpec sampler_from(const std::string& name, double temperature, std::uint64_t seed) {
  fastgen::SamplerSpec s;
  s.mode = name == "argmax" ? fastgen::SampleMode::kArgmax : fastgen::SampleMode::kCategorical;
  s.temperature = temperature;
  s.seed = seed;
  if (!(temperature > 0)) throw ConfigError("temperature must be positive");
  return s;
}

synth::Mode mode_from(const std::string& name) {
  return name == "tf" ? synth::Mode::kTeacherForced : synth::Mode::kFree;
}

// Synthesizes one utterance; `natural` is the reference waveform when known.
synth::Result synthesize_entry(const ckpt::Checkpoint& c, const std::vector<int>& track,
                               std::size_t samples, synth::Mode mode,
                               const fastgen::SamplerSpec& sampler, unsigned threads,
                               const Signal* natural) {
  synth::Options opt;
  opt.mode = mode;
  opt.sampler = sampler;
  opt.threads = threads;
  std::vector<std::vector<int>> reference;
  if (mode == synth::Mode::kTeacherForced) {
    if (!natural) throw ConfigError("teacher-forced synthesis needs --reference");
    const StreamCodec codec(c.spec);
    reference = codec.quantize(codec.split(*natural));
  }
  return synth::synthesize_utterance(c.spec, c.model, track, samples, opt,
                                     mode == synth::Mode::kTeacherForced ? &reference : nullptr);
}

int run_synth(const SynthArgs& a, const Globals& g) {
  const auto c = ckpt::load(a.checkpoint);
  const text::PhonemeInventory inventory(c.spec.inventory);
  std::optional<audio::Waveform> natural;
  if (!a.reference.empty()) natural = audio::read_wav(a.reference);

  std::size_t samples = 0;
  if (natural) {
    samples = natural->samples.size();
  } else if (a.seconds > 0) {
    samples = static_cast<std::size_t>(std::llround(a.seconds * c.spec.sample_rate));
  }
  std::vector<int> track;
  if (!a.alignment.empty()) {
    const auto t = text::load_alignment(a.alignment, c.spec.hop, inventory, samples,
                                        text::AlignmentFormat::kAuto, c.spec.sample_rate);
    track = t.frames;
    if (samples == 0) samples = track.size() * static_cast<std::size_t>(c.spec.hop);
  } else {
    if (a.dictionary.empty()) throw ConfigError("--text needs --dictionary");
    if (samples == 0) throw ConfigError("--text needs --seconds or --reference for the duration");
    const auto dict = text::PronunciationDictionary::load(a.dictionary);
    const auto phonemes = text::text_to_phonemes(a.text, dict, inventory);
    track = text::uniform_align(phonemes, text::frames_for(samples, c.spec.hop), c.spec.hop).frames;
  }
  const auto result = synthesize_entry(c, track, samples, mode_from(a.mode),
                                       sampler_from(a.sampler, a.temperature, a.seed), g.threads,
                                       natural ? &natural->samples : nullptr);
  audio::write_wav(a.out, result.waveform, static_cast<int>(c.spec.sample_rate));
  std::cout << "wrote " << samples << " samples to " << a.out << " in " << result.seconds
            << " s\n";
  if (natural) {
    const auto y = audio::read_wav(a.out);
    print_snr(std::cout, metrics::snr_db(natural->samples, y.samples));
  }
  return 0;
}

// --------------------------------------------------------------------- eval

struct EvalArgs {
  std::string manifest;
  std::string checkpoint;
  std::string mode = "tf";
  std::string split = "test";
  std::string dictionary;
  int levels = 8;
  int order = 10;
  std::string sampler = "argmax";
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

void write_report(std::ostream& out, const metrics::MetricReport& r) {
  out << "utterance,snr_energy,snr_conv,sd,msd\n";
  out << std::setprecision(10);
  for (const auto& u : r.utterances) {
    out << u.id << ',' << u.snr_energy << ',' << u.snr_conv << ',' << u.sd << ',' << u.msd << '\n';
  }
  out << "mean," << r.snr_energy.mean << ',' << r.snr_conv.mean << ',' << r.sd.mean << ','
      << r.msd.mean << '\n';
  out << "ci95," << r.snr_energy.ci95 << ',' << r.snr_conv.ci95 << ',' << r.sd.ci95 << ','
      << r.msd.ci95 << '\n';
}

std::string table_row(const metrics::MetricReport& r) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << "SNR(conv) " << r.snr_conv.mean << " ± "
    << r.snr_conv.ci95 << "  SNR(energy) " << r.snr_energy.mean << " ± " << r.snr_energy.ci95 << "  SD "
    << r.sd.mean << " ± " << r.sd.ci95 << "  MSD " << r.msd.mean << " ± " << r.msd.ci95
    << "  (n=" << r.utterances.size() << (r.degenerate ? ", CI undefined" : "") << ")";
  return s.str();
}

int run_eval(const EvalArgs& a, const Globals& g) {
  const auto entries = config::load_manifest(a.manifest);
  const auto split = a.split == "train" ? config::Split::kTrain : config::Split::kTest;
  const auto items = load_split(entries, split);
  if (items.empty()) throw IngestionError("no entries in the '" + a.split + "' split");

  std::vector<metrics::UtteranceMetrics> rows;
  if (a.mode == "decrec") {
    ModelSpec spec;
    if (!a.checkpoint.empty()) {
      spec = ckpt::load(a.checkpoint).spec;
    } else {
      spec.levels = a.levels;
      spec.wavelet_order = a.order;
      spec.gains = fit_gains_on(spec, load_split(entries, config::Split::kTrain));
    }
    const StreamCodec codec(spec);
    for (const auto& it : items) {
      const auto& x = it.wave.samples;
      const auto y = codec.merge(codec.dequantize(codec.quantize(codec.split(x))));
      rows.push_back(metrics::evaluate_pair(it.entry.id, x, y, it.wave.sample_rate));
    }
  } else {
    if (a.checkpoint.empty()) throw ConfigError("eval --mode " + a.mode + " needs a checkpoint");
    const auto c = ckpt::load(a.checkpoint);
    const auto dict = maybe_dictionary(a.dictionary);
    const auto sampler = sampler_from(a.sampler, a.temperature, a.seed);
    for (const auto& it : items) {
      const auto& x = it.wave.samples;
      const auto track = config::conditioning_track(it.entry, x.size(), c.spec, dict ? &*dict : nullptr);
      const auto r = synthesize_entry(c, track, x.size(), mode_from(a.mode), sampler, g.threads, &x);
      rows.push_back(metrics::evaluate_pair(it.entry.id, x, r.waveform, it.wave.sample_rate));
    }
  }
  const auto report = metrics::aggregate(std::move(rows));
  if (a.out.empty()) {
    write_report(std::cout, report);
  } else {
    std::ofstream out(a.out);
    if (!out) throw IoError("cannot write " + a.out);
    write_report(out, report);
  }
  std::cerr << a.mode << ": " << table_row(report) << '\n';
  return 0;
}

// --------------------------------------------------------------------- plot

struct PlotArgs {
  std::string wav;
  bool mel = false;
  std::string out;
  double range_db = 80.0;
};

int run_plot(const PlotArgs& a) {
  const auto w = audio::read_wav(a.wav);
  const double rate = w.sample_rate;
  const metrics::Spectrogram s = a.mel ? metrics::mel_spectrogram(w.samples, rate)
                                       : metrics::stft_magnitude(w.samples, metrics::sd_stft(rate));
  if (s.frames == 0) throw StructuralError(a.wav + ": shorter than one analysis frame");
  const fs::path prefix = a.out.empty() ? fs::path(a.wav).replace_extension("") : fs::path(a.out);
  fs::path csv_path = prefix, pgm_path = prefix;
  csv_path += a.mel ? ".mel.csv" : ".spec.csv";
  pgm_path += a.mel ? ".mel.pgm" : ".spec.pgm";

  std::vector<double> db(s.magnitudes.size());
  double top = -1e300;
  for (std::size_t i = 0; i < db.size(); ++i) {
    db[i] = 20.0 * std::log10(std::max(s.magnitudes[i], metrics::kMagnitudeFloor));
    top = std::max(top, db[i]);
  }
  {
    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot write " + csv_path.string());
    csv << std::setprecision(8);
    for (std::size_t f = 0; f < s.frames; ++f) {
      for (std::size_t k = 0; k < s.bins; ++k) csv << (k ? "," : "") << db[f * s.bins + k];
      csv << '\n';
    }
  }
  // Binary PGM: width = frames, height = bands, low frequencies at the bottom.
  std::string pgm = "P5\n" + std::to_string(s.frames) + " " + std::to_string(s.bins) + "\n255\n";
  for (std::size_t row = 0; row < s.bins; ++row) {
    const std::size_t k = s.bins - 1 - row;
    for (std::size_t f = 0; f < s.frames; ++f) {
      const double v = std::clamp((db[f * s.bins + k] - (top - a.range_db)) / a.range_db, 0.0, 1.0);
      pgm.push_back(static_cast<char>(std::lround(255.0 * v)));
    }
  }
  write_text(pgm_path, pgm);
  std::cout << "wrote " << s.frames << "x" << s.bins << " " << (a.mel ? "mel " : "")
            << "spectrogram to " << csv_path.string() << " and " << pgm_path.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- bench-gen

struct BenchArgs {
  std::string checkpoint;
  double seconds = 0.25;
  std::string alignment;
  std::string out;
};

int run_bench(const BenchArgs& a, const Globals& g) {
  const auto c = ckpt::load(a.checkpoint);
  const text::PhonemeInventory inventory(c.spec.inventory);
  const auto samples = static_cast<std::size_t>(std::llround(a.seconds * c.spec.sample_rate));
  std::vector<int> track;
  if (!a.alignment.empty()) {
    track = text::load_alignment(a.alignment, c.spec.hop, inventory, samples,
                                 text::AlignmentFormat::kAuto, c.spec.sample_rate)
                .frames;
  } else {
    track.assign(text::frames_for(samples, c.spec.hop), inventory.index_of("AH0"));
  }
  fastgen::SamplerSpec sampler;
  sampler.mode = fastgen::SampleMode::kCategorical;
  const unsigned cores = hardware_threads();
  const unsigned parallel_threads =
      g.threads_set ? g.threads
                    : static_cast<unsigned>(std::min<std::size_t>(c.spec.stream_count(), cores));
  const auto serial = synthesize_entry(c, track, samples, synth::Mode::kFree, sampler, 1, nullptr);
  const auto parallel =
      synthesize_entry(c, track, samples, synth::Mode::kFree, sampler, parallel_threads, nullptr);
  const double serial_hz = static_cast<double>(samples) / serial.seconds;
  const double parallel_hz = static_cast<double>(samples) / parallel.seconds;
  const bool identical = serial.waveform == parallel.waveform;
  const json report{{"samples", samples},
                    {"streams", c.spec.stream_count()},
                    {"channels", c.spec.channels},
                    {"cores", cores},
                    {"parallel_threads", parallel_threads},
                    {"serial_hz", serial_hz},
                    {"parallel_hz", parallel_hz},
                    {"speedup", parallel_hz / serial_hz},
                    {"outputs_identical", identical},
                    {"speedup_claim_applicable", cores >= 4}};
  std::cout << report.dump(2) << '\n';
  if (!a.out.empty()) write_text(a.out, report.dump(2) + "\n");
  if (!identical) throw GenerationError("parallel and serial generation disagree");
  return 0;
}

// ------------------------------------------------------------- make-fixture

struct FixtureArgs {
  std::string dir;
  std::size_t train = 8;
  std::size_t test = 4;
  double min_seconds = 1.0;
  double max_seconds = 2.0;
  std::uint64_t seed = 1;
  bool overfit = false;
};

int run_fixture(const FixtureArgs& a) {
  if (a.overfit) {
    fs::create_directories(a.dir);
    const auto u = fixture::overfit_clip();
    audio::write_wav(fs::path(a.dir) / "overfit.wav", u.samples, u.sample_rate);
    write_text(fs::path(a.dir) / "overfit.tsv", fixture::alignment_tsv(u));
    std::string manifest;
    for (const char* split : {"train", "test"}) {
      manifest += json{{"id", "overfit"},
                       {"wav_path", "overfit.wav"},
                       {"alignment_path", "overfit.tsv"},
                       {"text", u.text},
                       {"split", split}}
                      .dump() +
                  "\n";
    }
    write_text(fs::path(a.dir) / "manifest.jsonl", manifest);
    write_text(fs::path(a.dir) / "dictionary.txt", fixture::dictionary_text());
    std::cout << "wrote overfit clip to " << a.dir << '\n';
    return 0;
  }
  fixture::CorpusSpec spec;
  spec.train = a.train;
  spec.test = a.test;
  spec.min_seconds = a.min_seconds;
  spec.max_seconds = a.max_seconds;
  spec.seed = a.seed;
  if (!(spec.min_seconds > 0) || spec.max_seconds < spec.min_seconds) {
    throw ConfigError("invalid clip duration range");
  }
  const auto utts = fixture::write_corpus(a.dir, spec);
  std::cout << "wrote " << utts.size() << " utterances to " << a.dir << '\n';
  return 0;
}

// --------------------------------------------------------------------- trim

struct TrimArgs {
  std::string wav;
  std::string out;
  double threshold_db = 40.0;
  double frame_ms = 30.0;
};

int run_trim(const TrimArgs& a) {
  const auto w = audio::read_wav(a.wav);
  const auto t = audio::vad_trim(w, a.threshold_db, a.frame_ms);
  audio::write_wav(a.out, t);
  std::cout << "kept " << t.samples.size() << " of " << w.samples.size() << " samples\n";
  return 0;
}

int exit_code(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::kConfig:
      return 1;
    case ErrorKind::kNumerical:
    case ErrorKind::kGeneration:
      return 3;
    default:
      return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subband autoregressive speech synthesis toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "worker threads (1 = deterministic serial mode)")
      ->check(CLI::PositiveNumber)
      ->each([&](const std::string&) { g.threads_set = true; });

  DecomposeArgs dec;
  auto* c_dec = app.add_subcommand("decompose", "wavelet-decompose a wav into subband streams");
  c_dec->add_option("wav", dec.wav)->required()->check(CLI::ExistingFile);
  c_dec->add_option("--levels", dec.levels)->check(CLI::Range(1, 30));
  c_dec->add_option("--order", dec.order)->check(CLI::Range(1, 20));
  c_dec->add_option("-o,--out", dec.out, "output prefix");
  c_dec->add_option("--format", dec.format)->check(CLI::IsMember({"raw", "wav"}));

  ReconstructArgs rec;
  auto* c_rec = app.add_subcommand("reconstruct", "synthesize a waveform from decomposed streams");
  c_rec->add_option("subbands", rec.sidecar, "sidecar JSON written by decompose")
      ->required()
      ->check(CLI::ExistingFile);
  c_rec->add_option("-o,--out", rec.out);
  c_rec->add_option("--reference", rec.reference, "wav to measure SNR against");
  c_rec->add_flag("--float", rec.float_output, "write float32 instead of PCM16");

  FitGainsArgs fg;
  auto* c_fg = app.add_subcommand("fit-gains", "fit per-stream quantizer gains on a manifest");
  c_fg->add_option("manifest", fg.manifest)->required()->check(CLI::ExistingFile);
  c_fg->add_option("--config", fg.config)->check(CLI::ExistingFile);
  c_fg->add_option("--levels", fg.levels)->check(CLI::Range(1, 30));
  c_fg->add_option("--order", fg.order)->check(CLI::Range(1, 20));
  c_fg->add_option("-o,--out", fg.out);

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "train encoder and stream generators");
  c_tr->add_option("config", tr.config)->required()->check(CLI::ExistingFile);
  c_tr->add_option("--gains", tr.gains)->check(CLI::ExistingFile);
  c_tr->add_option("--max-iters", tr.max_iters)->check(CLI::PositiveNumber);
  c_tr->add_option("-o,--out", tr.out, "output directory (default: paths.output_dir)");

  SynthArgs sy;
  auto* c_sy = app.add_subcommand("synth", "synthesize a waveform from a checkpoint");
  c_sy->add_option("checkpoint", sy.checkpoint)->required()->check(CLI::ExistingFile);
  c_sy->add_option("--mode", sy.mode)->check(CLI::IsMember({"tf", "free"}));
  auto* o_text = c_sy->add_option("--text", sy.text);
  auto* o_align = c_sy->add_option("--alignment", sy.alignment)->check(CLI::ExistingFile);
  o_text->excludes(o_align);
  c_sy->add_option("--dictionary", sy.dictionary)->check(CLI::ExistingFile);
  c_sy->add_option("--reference", sy.reference, "natural wav (teacher forcing, duration, SNR)")
      ->check(CLI::ExistingFile);
  c_sy->add_option("--seconds", sy.seconds);
  c_sy->add_option("--sampler", sy.sampler)->check(CLI::IsMember({"argmax", "categorical"}));
  c_sy->add_option("--temperature", sy.temperature);
  c_sy->add_option("--seed", sy.seed);
  c_sy->add_option("-o,--out", sy.out);

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "objective metrics over a manifest split");
  c_ev->add_option("manifest", ev.manifest)->required()->check(CLI::ExistingFile);
  c_ev->add_option("checkpoint", ev.checkpoint)->check(CLI::ExistingFile);
  c_ev->add_option("--mode", ev.mode)->check(CLI::IsMember({"tf", "free", "decrec"}));
  c_ev->add_option("--split", ev.split)->check(CLI::IsMember({"train", "test"}));
  c_ev->add_option("--dictionary", ev.dictionary)->check(CLI::ExistingFile);
  c_ev->add_option("--levels", ev.levels)->check(CLI::Range(1, 30));
  c_ev->add_option("--order", ev.order)->check(CLI::Range(1, 20));
  c_ev->add_option("--sampler", ev.sampler)->check(CLI::IsMember({"argmax", "categorical"}));
  c_ev->add_option("--temperature", ev.temperature);
  c_ev->add_option("--seed", ev.seed);
  c_ev->add_option("-o,--out", ev.out, "CSV path (default stdout)");

  PlotArgs pl;
  auto* c_pl = app.add_subcommand("plot", "spectrogram as CSV and PGM");
  c_pl->add_option("wav", pl.wav)->required()->check(CLI::ExistingFile);
  c_pl->add_flag("--mel", pl.mel, "40-band mel spectrogram, 25 ms / 5 ms");
  c_pl->add_option("-o,--out", pl.out, "output prefix");
  c_pl->add_option("--range-db", pl.range_db)->check(CLI::PositiveNumber);

  BenchArgs be;
  auto* c_be = app.add_subcommand("bench-gen", "serial vs parallel generation rate");
  c_be->add_option("checkpoint", be.checkpoint)->required()->check(CLI::ExistingFile);
  c_be->add_option("--seconds", be.seconds)->check(CLI::PositiveNumber);
  c_be->add_option("--alignment", be.alignment)->check(CLI::ExistingFile);
  c_be->add_option("-o,--out", be.out, "also write the JSON report here");

  FixtureArgs fx;
  auto* c_fx = app.add_subcommand("make-fixture", "write a synthetic speech corpus");
  c_fx->add_option("dir", fx.dir)->required();
  c_fx->add_option("--train", fx.train);
  c_fx->add_option("--test", fx.test);
  c_fx->add_option("--min-seconds", fx.min_seconds);
  c_fx->add_option("--max-seconds", fx.max_seconds);
  c_fx->add_option("--seed", fx.seed);
  c_fx->add_flag("--overfit", fx.overfit, "single clip used for train and test");

  TrimArgs tm;
  auto* c_tm = app.add_subcommand("trim", "remove leading and trailing silence");
  c_tm->add_option("wav", tm.wav)->required()->check(CLI::ExistingFile);
  c_tm->add_option("-o,--out", tm.out)->required();
  c_tm->add_option("--threshold-db", tm.threshold_db)->check(CLI::PositiveNumber);
  c_tm->add_option("--frame-ms", tm.frame_ms)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*c_dec) return run_decompose(dec);
    if (*c_rec) return run_reconstruct(rec);
    if (*c_fg) return run_fit_gains(fg);
    if (*c_tr) return run_train(tr, g);
    if (*c_sy) {
      if (sy.text.empty() && sy.alignment.empty()) {
        std::cerr << "synth: one of --text or --alignment is required\n";
        return 1;
      }
      return run_synth(sy, g);
    }
    if (*c_ev) return run_eval(ev, g);
    if (*c_pl) return run_plot(pl);
    if (*c_be) return run_bench(be, g);
    if (*c_fx) return run_fixture(fx);
    if (*c_tm) return run_trim(tm);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace sbtts::cli

int main(int argc, char** argv) { return sbtts::cli::main(argc, argv); }
