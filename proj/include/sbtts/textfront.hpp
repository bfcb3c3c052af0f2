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

// Text normalization, CMUdict lookup, the 70-symbol phoneme inventory and
// alignment ingestion into frame-rate conditioning tracks.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sbtts/errors.hpp"

namespace sbtts::text {

inline constexpr std::size_t kInventorySize = 70;
inline constexpr int kSilence = 0;

// ARPAbet phones with vowel stress expanded, silence at index 0:
// 1 + 24 consonants + 15 vowels x 3 stress levels = 70.
class PhonemeInventory {
 public:
  static PhonemeInventory standard() {
    static constexpr std::array<std::string_view, 24> kConsonants = {
        "B", "CH", "D", "DH", "F", "G", "HH", "JH", "K", "L", "M", "N",
        "NG", "P", "R", "S", "SH", "T", "TH", "V", "W", "Y", "Z", "ZH"};
    static constexpr std::array<std::string_view, 15> kVowels = {
        "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER",
        "EY", "IH", "IY", "OW", "OY", "UH", "UW"};
    std::vector<std::string> symbols{"SIL"};
    for (auto c : kConsonants) symbols.emplace_back(c);
    for (auto v : kVowels) {
      for (char stress : {'0', '1', '2'}) symbols.push_back(std::string(v) + stress);
    }
    return PhonemeInventory(std::move(symbols));
  }

  explicit PhonemeInventory(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.size() != kInventorySize) {
      throw ConfigError("phoneme inventory must hold exactly " + std::to_string(kInventorySize) +
                        " symbols, got " + std::to_string(symbols_.size()));
    }
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      std::string key = upper(symbols_[i]);
      if (!index_.emplace(key, static_cast<int>(i)).second) {
        throw ConfigError("duplicate phoneme symbol " + symbols_[i]);
      }
    }
  }

  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  const std::string& symbol(int index) const { return symbols_.at(index); }

  // Case-insensitive. Common silence spellings (sil, sp, pau, empty) map to 0.
  int index_of(std::string_view symbol) const {
    std::string key = upper(symbol);
    if (key.empty() || key == "SIL" || key == "SP" || key == "PAU" || key == "H#" || key == "<SIL>")
      return kSilence;
    auto it = index_.find(key);
    if (it == index_.end()) throw FrontEndError("unknown phoneme symbol '" + std::string(symbol) + "'");
    return it->second;
  }

  bool contains(std::string_view symbol) const {
    try {
      index_of(symbol);
      return true;
    } catch (const FrontEndError&) {
      return false;
    }
  }

  // FNV-1a over the newline-joined symbol list; stored in checkpoints.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& s : symbols_) {
      for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
      h = (h ^ '\n') * 1099511628211ULL;
    }
    return h;
  }

 private:
  static std::string upper(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
  }

  std::vector<std::string> symbols_;
  std::unordered_map<std::string, int> index_;
};

// English cardinal words, no hyphens and no "and": 25 -> "twenty five".
inline std::string number_to_words(std::uint64_t n) {
  static constexpr std::array<std::string_view, 20> kSmall = {
      "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
      "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
      "eighteen", "nineteen"};
  static constexpr std::array<std::string_view, 10> kTens = {
      "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};
  static constexpr std::array<std::pair<std::uint64_t, std::string_view>, 6> kScales = {{
      {1000000000000000000ULL, "quintillion"},
      {1000000000000000ULL, "quadrillion"},
      {1000000000000ULL, "trillion"},
      {1000000000ULL, "billion"},
      {1000000ULL, "million"},
      {1000ULL, "thousand"},
  }};

  auto below_thousand = [&](std::uint64_t v) {
    std::string out;
    auto add = [&out](std::string_view w) {
      if (!out.empty()) out += ' ';
      out += w;
    };
    if (v >= 100) {
      add(kSmall[v / 100]);
      add("hundred");
      v %= 100;
    }
    if (v >= 20) {
      add(kTens[v / 10]);
      if (v % 10) add(kSmall[v % 10]);
    } else if (v > 0) {
      add(kSmall[v]);
    }
    return out;
  };

  if (n == 0) return "zero";
  std::string out;
  for (const auto& [scale, name] : kScales) {
    if (n >= scale) {
      if (!out.empty()) out += ' ';
      out += below_thousand(n / scale);
      out += ' ';
      out += name;
      n %= scale;
    }
  }
  if (n > 0) {
    if (!out.empty()) out += ' ';
    out += below_thousand(n);
  }
  return out;
}

// Lower-case, expand digit runs to words, drop everything outside
// [a-z ' space], collapse whitespace.
inline std::string normalize_text(std::string_view raw) {
  std::string expanded;
  expanded.reserve(raw.size() * 2);
  for (std::size_t i = 0; i < raw.size();) {
    const unsigned char c = static_cast<unsigned char>(raw[i]);
    if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j]))) ++j;
      std::string_view digits = raw.substr(i, j - i);
      // Very long digit strings are read digit by digit.
      if (digits.size() > 18) {
        for (char d : digits) {
          expanded += ' ';
          expanded += number_to_words(static_cast<std::uint64_t>(d - '0'));
        }
      } else {
        std::uint64_t value = 0;
        std::from_chars(digits.data(), digits.data() + digits.size(), value);
        expanded += ' ';
        expanded += number_to_words(value);
      }
      expanded += ' ';
      i = j;
    } else {
      expanded += static_cast<char>(std::isspace(c) ? ' ' : std::tolower(c));
      ++i;
    }
  }
  std::string out;
  out.reserve(expanded.size());
  bool pending_space = false;
  for (char c : expanded) {
    const bool keep = (c >= 'a' && c <= 'z') || c == '\'';
    if (c == ' ') {
      pending_space = !out.empty();
    } else if (keep) {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

// CMUdict text format: "WORD  PH1 PH2 ...", ";;;" comments, alternate
// pronunciations as "WORD(1)". The first variant of each word wins.
class PronunciationDictionary {
 public:
  static PronunciationDictionary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pronunciation dictionary " + path);
    return parse(in);
  }

  static PronunciationDictionary parse(std::istream& in) {
    PronunciationDictionary dict;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line.rfind(";;;", 0) == 0) continue;
      std::istringstream ls(line);
      std::string word;
      if (!(ls >> word)) continue;
      if (auto paren = word.find('('); paren != std::string::npos && paren > 0) {
        word.resize(paren);
      }
      for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      std::vector<std::string> phones;
      for (std::string p; ls >> p;) {
        if (p[0] == '#') break;
        phones.push_back(p);
      }
      if (phones.empty()) continue;
      dict.entries_.try_emplace(word, std::move(phones));
    }
    return dict;
  }

  std::size_t size() const { return entries_.size(); }

  const std::vector<std::string>* find(std::string_view word) const {
    auto it = entries_.find(std::string(word));
    return it == entries_.end() ? nullptr : &it->second;
  }

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

inline std::vector<int> lookup(std::string_view word, const PronunciationDictionary& dict,
                               const PhonemeInventory& inventory) {
  std::string key(word);
  for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto* phones = dict.find(key);
  if (!phones) throw FrontEndError("out-of-vocabulary word '" + std::string(word) + "'");
  std::vector<int> out;
  out.reserve(phones->size());
  for (const auto& p : *phones) out.push_back(inventory.index_of(p));
  return out;
}

// Full text to phoneme indices, wrapped in leading and trailing silence.
inline std::vector<int> text_to_phonemes(std::string_view raw, const PronunciationDictionary& dict,
                                         const PhonemeInventory& inventory) {
  std::vector<int> out{kSilence};
  std::istringstream words(normalize_text(raw));
  for (std::string w; words >> w;) {
    const auto seq = lookup(w, dict, inventory);
    out.insert(out.end(), seq.begin(), seq.end());
  }
  out.push_back(kSilence);
  return out;
}

struct AlignedPhonemeTrack {
  std::vector<int> frames;
  int hop = 80;
  std::string utterance_id;

  std::size_t size() const { return frames.size(); }
};

inline std::size_t frames_for(std::size_t samples, int hop) {
  return (samples + static_cast<std::size_t>(hop) - 1) / static_cast<std::size_t>(hop);
}

enum class AlignmentFormat { kAuto, kTsv, kHtk };

struct Interval {
  std::int64_t start;  // samples, inclusive
  std::int64_t end;    // samples, exclusive
  int phoneme;
  std::size_t line;
};

namespace detail {

inline std::vector<Interval> parse_intervals(std::istream& in, AlignmentFormat format,
                                             double sample_rate,
                                             const PhonemeInventory& inventory) {
  std::vector<Interval> out;
  std::string line;
  std::size_t line_no = 0;
  const double htk_units_per_sample = 1e7 / sample_rate;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, sym;
    if (!(ls >> a >> b >> sym)) {
      throw IngestionError("alignment line " + std::to_string(line_no) +
                           ": expected 'start end symbol'");
    }
    auto parse_int = [&](const std::string& s) {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
        throw IngestionError("alignment line " + std::to_string(line_no) + ": bad time '" + s +
                             "'");
      }
      return v;
    };
    std::int64_t start = parse_int(a);
    std::int64_t end = parse_int(b);
    if (format == AlignmentFormat::kHtk) {
      start = static_cast<std::int64_t>(std::llround(start / htk_units_per_sample));
      end = static_cast<std::int64_t>(std::llround(end / htk_units_per_sample));
    }
    if (end < start) {
      throw IngestionError("alignment line " + std::to_string(line_no) + ": end before start");
    }
    int phoneme = 0;
    try {
      phoneme = inventory.index_of(sym);
    } catch (const FrontEndError& e) {
      throw IngestionError("alignment line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back({start, end, phoneme, line_no});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Interval& x, const Interval& y) { return x.start < y.start; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].start < out[i - 1].end) {
      throw IngestionError("alignment line " + std::to_string(out[i].line) +
                           ": interval overlaps line " + std::to_string(out[i - 1].line));
    }
  }
  return out;
}

}  // namespace detail

// Each frame takes the phoneme whose interval contains the frame midpoint;
// uncovered frames are silence. total_samples, when non-zero, fixes the frame
// count to the waveform length, otherwise the last interval end does.
inline AlignedPhonemeTrack alignment_from_stream(std::istream& in, int hop,
                                                 const PhonemeInventory& inventory,
                                                 AlignmentFormat format,
                                                 std::size_t total_samples = 0,
                                                 double sample_rate = 16000.0) {
  if (hop < 1) throw ConfigError("hop must be >= 1");
  if (format == AlignmentFormat::kAuto) format = AlignmentFormat::kTsv;
  const auto intervals = detail::parse_intervals(in, format, sample_rate, inventory);
  std::size_t samples = total_samples;
  if (samples == 0 && !intervals.empty()) samples = static_cast<std::size_t>(intervals.back().end);
  AlignedPhonemeTrack track;
  track.hop = hop;
  track.frames.assign(frames_for(samples, hop), kSilence);
  std::size_t cursor = 0;
  for (std::size_t f = 0; f < track.frames.size(); ++f) {
    const std::int64_t mid = static_cast<std::int64_t>(f) * hop + hop / 2;
    while (cursor < intervals.size() && intervals[cursor].end <= mid) ++cursor;
    if (cursor < intervals.size() && intervals[cursor].start <= mid) {
      track.frames[f] = intervals[cursor].phoneme;
    }
  }
  return track;
}

inline AlignedPhonemeTrack load_alignment(const std::string& path, int hop,
                                          const PhonemeInventory& inventory,
                                          std::size_t total_samples = 0,
                                          AlignmentFormat format = AlignmentFormat::kAuto,
                                          double sample_rate = 16000.0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open alignment file " + path);
  if (format == AlignmentFormat::kAuto) {
    const bool htk = path.size() >= 4 &&
                     (path.ends_with(".lab") || path.ends_with(".htk") || path.ends_with(".rec"));
    format = htk ? AlignmentFormat::kHtk : AlignmentFormat::kTsv;
  }
  auto track = alignment_from_stream(in, hop, inventory, format, total_samples, sample_rate);
  track.utterance_id = path;
  return track;
}

// Equal contiguous runs, remainder going to the earliest phonemes.
inline AlignedPhonemeTrack uniform_align(const std::vector<int>& phonemes, std::size_t total_frames,
                                         int hop = 80) {
  if (phonemes.empty()) throw FrontEndError("uniform_align needs at least one phoneme");
  AlignedPhonemeTrack track;
  track.hop = hop;
  track.frames.reserve(total_frames);
  const std::size_t base = total_frames / phonemes.size();
  const std::size_t extra = total_frames % phonemes.size();
  for (std::size_t i = 0; i < phonemes.size(); ++i) {
    const std::size_t run = base + (i < extra ? 1 : 0);
    track.frames.insert(track.frames.end(), run, phonemes[i]);
  }
  return track;
}

}  // namespace sbtts::text
