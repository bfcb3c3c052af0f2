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

// Synthetic source-filter speech with exact phoneme alignments and matching
// text, for tests, demos and desk-scale experiments when no recorded corpus
// is at hand.
#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sbtts/audio.hpp"
#include "sbtts/errors.hpp"
#include "sbtts/textfront.hpp"

namespace sbtts::fixture {

struct Segment {
  std::string phoneme;  // inventory symbol
  std::int64_t start = 0;
  std::int64_t end = 0;
};

struct Utterance {
  std::string id;
  std::string text;
  std::vector<double> samples;
  std::vector<Segment> segments;
  int sample_rate = 16000;
};

namespace detail {

enum class Kind { kSilence, kVowel, kNasal, kFricative };

struct Phone {
  Kind kind;
  double f1, f2, f3;  // resonator centers, Hz
  double gain;
};

inline const std::map<std::string, Phone>& phones() {
  static const std::map<std::string, Phone> table = {
      {"SIL", {Kind::kSilence, 0, 0, 0, 0.0}},
      {"IY1", {Kind::kVowel, 270, 2290, 3010, 1.0}},
      {"UW1", {Kind::kVowel, 300, 870, 2240, 1.0}},
      {"OW1", {Kind::kVowel, 500, 900, 2400, 1.0}},
      {"AO1", {Kind::kVowel, 590, 880, 2540, 1.0}},
      {"AH1", {Kind::kVowel, 640, 1190, 2390, 1.0}},
      {"AE1", {Kind::kVowel, 660, 1720, 2410, 1.0}},
      {"M", {Kind::kNasal, 250, 1100, 2200, 0.35}},
      {"N", {Kind::kNasal, 250, 1500, 2500, 0.35}},
      {"S", {Kind::kFricative, 4200, 5500, 6800, 0.12}},
      {"SH", {Kind::kFricative, 2600, 3400, 4500, 0.15}},
      {"F", {Kind::kFricative, 1500, 4000, 6500, 0.06}},
  };
  return table;
}

struct Word {
  const char* spelling;
  std::vector<std::string> phones;
};

inline const std::vector<Word>& words() {
  static const std::vector<Word> list = {
      {"see", {"S", "IY1"}},         {"sue", {"S", "UW1"}},         {"me", {"M", "IY1"}},
      {"no", {"N", "OW1"}},          {"saw", {"S", "AO1"}},         {"fee", {"F", "IY1"}},
      {"she", {"SH", "IY1"}},        {"moon", {"M", "UW1", "N"}},   {"sun", {"S", "AH1", "N"}},
      {"fan", {"F", "AE1", "N"}},    {"man", {"M", "AE1", "N"}},    {"shoe", {"SH", "UW1"}},
      {"moss", {"M", "AO1", "S"}},   {"fun", {"F", "AH1", "N"}},    {"knee", {"N", "IY1"}},
      {"mash", {"M", "AE1", "SH"}},
  };
  return list;
}

// Two-pole resonator with unit gain at DC.
class Resonator {
 public:
  void tune(double freq, double bandwidth, double sr) {
    c_ = -std::exp(-2.0 * std::numbers::pi * bandwidth / sr);
    b_ = 2.0 * std::exp(-std::numbers::pi * bandwidth / sr) *
         std::cos(2.0 * std::numbers::pi * freq / sr);
    a_ = 1.0 - b_ - c_;
  }
  double operator()(double x) {
    const double y = a_ * x + b_ * y1_ + c_ * y2_;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double a_ = 1, b_ = 0, c_ = 0, y1_ = 0, y2_ = 0;
};

struct Plan {
  std::vector<Segment> segments;
  std::string text;
};

struct VoiceParams {
  double f0_start = 130.0;
  double f0_end = 100.0;
  double jitter = 0.0;     // relative per-period f0 perturbation
  double aspiration = 0.0; // noise added to the voiced source
  double floor_noise = 0.0;
};

inline std::vector<double> render(const std::vector<Segment>& segs, std::int64_t total,
                                  const VoiceParams& voice, std::mt19937_64& rng, int sr) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(total), 0.0);
  Resonator v1, v2, v3, n1, n2, n3;
  double phase = 1.0;  // fires a pulse on the first voiced sample
  double period_scale = 1.0;
  double lp1 = 0.0, lp2 = 0.0;
  const double ramp = 0.008 * sr;
  for (const Segment& seg : segs) {
    const Phone& ph = phones().at(seg.phoneme);
    v1.tune(ph.kind == Kind::kVowel || ph.kind == Kind::kNasal ? ph.f1 : 500, 80, sr);
    v2.tune(ph.kind == Kind::kVowel || ph.kind == Kind::kNasal ? ph.f2 : 1500, 110, sr);
    v3.tune(ph.kind == Kind::kVowel || ph.kind == Kind::kNasal ? ph.f3 : 2500, 170, sr);
    if (ph.kind == Kind::kFricative) {
      n1.tune(ph.f1, 600, sr);
      n2.tune(ph.f2, 900, sr);
      n3.tune(ph.f3, 1200, sr);
    }
    const double len = static_cast<double>(seg.end - seg.start);
    for (std::int64_t n = seg.start; n < seg.end; ++n) {
      const double pos = static_cast<double>(n - seg.start);
      const double env = std::min({1.0, (pos + 1) / ramp, (len - pos) / ramp});
      const double shaped = 0.5 - 0.5 * std::cos(std::numbers::pi * std::max(0.0, env));
      const double frac = static_cast<double>(n) / static_cast<double>(std::max<std::int64_t>(1, total));
      const double f0 = voice.f0_start + (voice.f0_end - voice.f0_start) * frac;
      double s = 0.0;
      if (ph.kind == Kind::kVowel || ph.kind == Kind::kNasal) {
        phase += f0 * period_scale / sr;
        double src = 0.0;
        if (phase >= 1.0) {
          phase -= 1.0;
          src = 1.0;
          if (voice.jitter > 0) period_scale = 1.0 + voice.jitter * gauss(rng);
        }
        if (voice.aspiration > 0) src += voice.aspiration * gauss(rng);
        // Spectral tilt of the glottal source.
        lp1 = 0.9 * lp1 + 0.1 * src;
        lp2 = 0.9 * lp2 + 0.1 * lp1;
        const double f = v3(v2(v1(lp2 * 40.0)));
        s = ph.gain * f;
      } else if (ph.kind == Kind::kFricative) {
        const double e = gauss(rng);
        s = ph.gain * (n1(e) + 0.6 * n2(e) + 0.3 * n3(e));
      }
      out[static_cast<std::size_t>(n)] = s * shaped;
    }
  }
  if (voice.floor_noise > 0) {
    for (double& v : out) v += voice.floor_noise * gauss(rng);
  }
  return out;
}

inline void normalize_peak(std::vector<double>& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0.0) {
    for (double& v : x) v *= peak / m;
  }
}

}  // namespace detail

// A random word sequence rendered with a declining pitch contour, jitter,
// aspiration noise and a low noise floor.
inline Utterance make_utterance(std::uint64_t seed, double seconds, int sample_rate = 16000) {
  if (!(seconds > 0.2)) throw ConfigError("synthetic utterances must be longer than 0.2 s");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const auto total = static_cast<std::int64_t>(std::llround(seconds * sample_rate));
  const auto ms = [&](double v) { return static_cast<std::int64_t>(std::llround(v * sample_rate / 1000.0)); };

  Utterance u;
  u.sample_rate = sample_rate;
  const std::int64_t lead = ms(60 + 60 * uni(rng));
  const std::int64_t tail = ms(60 + 60 * uni(rng));
  u.segments.push_back({"SIL", 0, lead});
  std::int64_t t = lead;
  std::ostringstream text;
  bool first_word = true;
  while (true) {
    const auto& w = detail::words()[static_cast<std::size_t>(uni(rng) * detail::words().size())];
    std::vector<Segment> word;
    std::int64_t wt = t;
    for (const auto& p : w.phones) {
      const auto kind = detail::phones().at(p).kind;
      const double dur = kind == detail::Kind::kVowel ? 110 + 90 * uni(rng) : 60 + 50 * uni(rng);
      word.push_back({p, wt, wt + ms(dur)});
      wt += ms(dur);
    }
    const std::int64_t gap = uni(rng) < 0.3 ? ms(40 + 60 * uni(rng)) : 0;
    if (wt + gap + tail > total) break;
    u.segments.insert(u.segments.end(), word.begin(), word.end());
    if (gap > 0) u.segments.push_back({"SIL", wt, wt + gap});
    t = wt + gap;
    text << (first_word ? "" : " ") << w.spelling;
    first_word = false;
  }
  u.segments.push_back({"SIL", t, total});
  u.text = text.str();

  detail::VoiceParams voice;
  voice.f0_start = 110 + 40 * uni(rng);
  voice.f0_end = voice.f0_start * (0.7 + 0.2 * uni(rng));
  voice.jitter = 0.01;
  voice.aspiration = 0.05;
  voice.floor_noise = 0.0;
  u.samples = detail::render(u.segments, total, voice, rng, sample_rate);
  // Recording level varies per utterance; the noise floor sits about 55 dB
  // below the peak.
  detail::normalize_peak(u.samples, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (double& v : u.samples) v += 1.8e-3 * gauss(rng);
  detail::normalize_peak(u.samples, 0.3 + 0.6 * uni(rng));
  u.id = "synth" + std::to_string(seed);
  return u;
}

// Noise-free, constant-pitch clip: silence, two sustained vowels, silence.
// Every stream is close to periodic, so a small model can memorize it.
inline Utterance overfit_clip(double seconds = 1.0, int sample_rate = 16000) {
  const auto total = static_cast<std::int64_t>(std::llround(seconds * sample_rate));
  const std::int64_t tenth = total / 10;
  Utterance u;
  u.id = "overfit";
  u.text = "no";
  u.sample_rate = sample_rate;
  u.segments = {{"SIL", 0, tenth}, {"N", tenth, 2 * tenth}, {"OW1", 2 * tenth, 7 * tenth},
                {"SIL", 7 * tenth, total}};
  detail::VoiceParams voice;
  voice.f0_start = voice.f0_end = 125.0;
  std::mt19937_64 rng(7);
  u.samples = detail::render(u.segments, total, voice, rng, sample_rate);
  detail::normalize_peak(u.samples, 0.5);
  return u;
}

// Tab-separated "start end symbol" lines, sample units.
inline std::string alignment_tsv(const Utterance& u) {
  std::ostringstream out;
  for (const auto& s : u.segments) out << s.start << '\t' << s.end << '\t' << s.phoneme << '\n';
  return out.str();
}

// Frame-rate phoneme indices sampled at frame midpoints.
inline std::vector<int> phoneme_frames(const Utterance& u, int hop,
                                       const text::PhonemeInventory& inventory) {
  std::istringstream in(alignment_tsv(u));
  return text::alignment_from_stream(in, hop, inventory, text::AlignmentFormat::kTsv,
                                     u.samples.size(), u.sample_rate)
      .frames;
}

// CMUdict-format entries for every fixture word.
inline std::string dictionary_text() {
  std::ostringstream out;
  out << ";;; pronunciations for the synthetic fixture vocabulary\n";
  for (const auto& w : detail::words()) {
    std::string upper = w.spelling;
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    out << upper << ' ';
    for (const auto& p : w.phones) out << ' ' << p;
    out << '\n';
  }
  return out.str();
}

struct CorpusSpec {
  std::size_t train = 8;
  std::size_t test = 4;
  double min_seconds = 1.0;
  double max_seconds = 2.0;
  std::uint64_t seed = 1;
};

// Writes wav files, alignments, dictionary.txt and manifest.jsonl under dir.
inline std::vector<Utterance> write_corpus(const std::filesystem::path& dir, const CorpusSpec& spec) {
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> dur(spec.min_seconds, spec.max_seconds);
  std::vector<Utterance> out;
  std::ofstream manifest(dir / "manifest.jsonl");
  if (!manifest) throw IoError("cannot write " + (dir / "manifest.jsonl").string());
  for (std::size_t i = 0; i < spec.train + spec.test; ++i) {
    Utterance u = make_utterance(spec.seed * 1000 + i, dur(rng));
    u.id = "utt" + std::to_string(i);
    audio::write_wav(dir / (u.id + ".wav"), u.samples, u.sample_rate);
    {
      std::ofstream a(dir / (u.id + ".tsv"));
      a << alignment_tsv(u);
    }
    nlohmann::json j{{"id", u.id},
                     {"wav_path", u.id + ".wav"},
                     {"alignment_path", u.id + ".tsv"},
                     {"text", u.text},
                     {"split", i < spec.train ? "train" : "test"}};
    manifest << j.dump() << '\n';
    out.push_back(std::move(u));
  }
  std::ofstream dict(dir / "dictionary.txt");
  dict << dictionary_text();
  return out;
}

}  // namespace sbtts::fixture
