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

// Run configuration (JSON, strict schema) and dataset manifests (JSON lines).
#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"
#include "sbtts/model.hpp"
#include "sbtts/textfront.hpp"
#include "sbtts/trainer.hpp"

namespace sbtts::config {

using nlohmann::json;

struct Paths {
  std::string manifest;
  std::string dictionary;
  std::string output_dir = ".";
  std::string inventory;  // optional JSON list overriding the built-in symbols
};

struct RunConfig {
  ModelSpec model;
  train::TrainConfig train;
  Paths paths;

  bool operator==(const RunConfig& other) const;
};

namespace detail {

inline void check_keys(const json& j, const std::string& section,
                       std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.contains(key)) {
      throw ConfigError("unknown config key '" + (section.empty() ? key : section + "." + key) +
                        "'");
    }
  }
}

template <class V>
void read_opt(const json& j, const char* key, V& out, const std::string& section) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception&) {
    throw ConfigError("config key '" + section + "." + key + "' has the wrong type");
  }
}

}  // namespace detail

inline json to_json(const RunConfig& c) {
  const auto& m = c.model;
  const auto& t = c.train;
  json j;
  j["wavelet"] = {{"order", m.wavelet_order}, {"levels", m.levels}, {"fullband", m.fullband}};
  j["model"] = {{"channels", m.channels},
                {"cond_channels", m.cond_channels},
                {"dilations", m.dilations},
                {"encoder_hop", m.hop},
                {"sample_rate", m.sample_rate}};
  j["quantizer"] = {{"mu", m.mu}};
  j["train"] = t;
  j["paths"] = {{"manifest", c.paths.manifest},
                {"dictionary", c.paths.dictionary},
                {"output_dir", c.paths.output_dir},
                {"inventory", c.paths.inventory}};
  return j;
}

inline RunConfig from_json(const json& j) {
  detail::check_keys(j, "", {"wavelet", "model", "quantizer", "train", "paths"});
  RunConfig c;
  auto& m = c.model;
  if (j.contains("wavelet")) {
    const auto& w = j["wavelet"];
    detail::check_keys(w, "wavelet", {"order", "levels", "fullband"});
    detail::read_opt(w, "order", m.wavelet_order, "wavelet");
    detail::read_opt(w, "levels", m.levels, "wavelet");
    detail::read_opt(w, "fullband", m.fullband, "wavelet");
  }
  if (j.contains("model")) {
    const auto& s = j["model"];
    detail::check_keys(s, "model",
                       {"channels", "cond_channels", "dilations", "encoder_hop", "sample_rate"});
    detail::read_opt(s, "channels", m.channels, "model");
    detail::read_opt(s, "cond_channels", m.cond_channels, "model");
    detail::read_opt(s, "dilations", m.dilations, "model");
    detail::read_opt(s, "encoder_hop", m.hop, "model");
    detail::read_opt(s, "sample_rate", m.sample_rate, "model");
  }
  if (j.contains("quantizer")) {
    const auto& q = j["quantizer"];
    detail::check_keys(q, "quantizer", {"mu"});
    detail::read_opt(q, "mu", m.mu, "quantizer");
  }
  if (j.contains("train")) {
    const auto& s = j["train"];
    auto& t = c.train;
    detail::check_keys(s, "train",
                       {"lr0", "decay_every", "decay_factor", "adam_beta1", "adam_beta2",
                        "adam_eps", "batch", "seed", "max_iters", "crop", "checkpoint_every",
                        "grad_clip", "log_every", "threads"});
    detail::read_opt(s, "lr0", t.lr0, "train");
    detail::read_opt(s, "decay_every", t.decay_every, "train");
    detail::read_opt(s, "decay_factor", t.decay_factor, "train");
    detail::read_opt(s, "adam_beta1", t.adam_beta1, "train");
    detail::read_opt(s, "adam_beta2", t.adam_beta2, "train");
    detail::read_opt(s, "adam_eps", t.adam_eps, "train");
    detail::read_opt(s, "batch", t.batch, "train");
    detail::read_opt(s, "seed", t.seed, "train");
    detail::read_opt(s, "max_iters", t.max_iters, "train");
    detail::read_opt(s, "crop", t.crop, "train");
    detail::read_opt(s, "checkpoint_every", t.checkpoint_every, "train");
    detail::read_opt(s, "grad_clip", t.grad_clip, "train");
    detail::read_opt(s, "log_every", t.log_every, "train");
    detail::read_opt(s, "threads", t.threads, "train");
  }
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    detail::check_keys(p, "paths", {"manifest", "dictionary", "output_dir", "inventory"});
    detail::read_opt(p, "manifest", c.paths.manifest, "paths");
    detail::read_opt(p, "dictionary", c.paths.dictionary, "paths");
    detail::read_opt(p, "output_dir", c.paths.output_dir, "paths");
    detail::read_opt(p, "inventory", c.paths.inventory, "paths");
  }
  m.validate();
  c.train.validate();
  return c;
}

inline bool RunConfig::operator==(const RunConfig& other) const {
  return to_json(*this) == to_json(other);
}

inline std::vector<std::string> load_inventory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open inventory " + path);
  try {
    return json::parse(in).get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError("inventory " + path + " is not a JSON list of strings: " + e.what());
  }
}

// Relative paths inside the config resolve against the config's directory.
inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig c = from_json(j);
  const auto base = path.parent_path();
  for (std::string* p : {&c.paths.manifest, &c.paths.dictionary, &c.paths.output_dir,
                         &c.paths.inventory}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).string();
  }
  if (!c.paths.inventory.empty()) {
    c.model.inventory = load_inventory(c.paths.inventory);
    text::PhonemeInventory check(c.model.inventory);
  }
  return c;
}

enum class Split { kTrain, kTest };

struct ManifestEntry {
  std::string id;
  std::string wav_path;
  std::string alignment_path;
  std::string text;
  Split split = Split::kTrain;
};

// One JSON object per line: {"wav_path", "alignment_path"?, "text"?,
// "split": "train"|"test", "id"?}. Blank lines and '#' lines are skipped.
inline std::vector<ManifestEntry> parse_manifest(std::istream& in,
                                                 const std::filesystem::path& base,
                                                 bool check_files = true) {
  std::vector<ManifestEntry> out;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const std::string where = "manifest line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw IngestionError(where + ": " + e.what());
    }
    try {
      detail::check_keys(j, "", {"wav_path", "alignment_path", "text", "split", "id"});
    } catch (const ConfigError& e) {
      throw IngestionError(where + ": " + e.what());
    }
    ManifestEntry e;
    try {
      e.wav_path = j.at("wav_path").get<std::string>();
      e.alignment_path = j.value("alignment_path", std::string());
      e.text = j.value("text", std::string());
      const std::string split = j.value("split", std::string("train"));
      if (split == "train") {
        e.split = Split::kTrain;
      } else if (split == "test") {
        e.split = Split::kTest;
      } else {
        throw IngestionError(where + ": split must be 'train' or 'test', got '" + split + "'");
      }
      e.id = j.value("id", std::filesystem::path(e.wav_path).stem().string());
    } catch (const json::exception& ex) {
      throw IngestionError(where + ": " + ex.what());
    }
    const auto resolve = [&](std::string& p) {
      if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
    };
    resolve(e.wav_path);
    resolve(e.alignment_path);
    if (check_files) {
      if (!std::filesystem::exists(e.wav_path)) {
        throw IngestionError(where + ": missing audio file " + e.wav_path);
      }
      if (!e.alignment_path.empty() && !std::filesystem::exists(e.alignment_path)) {
        throw IngestionError(where + ": missing alignment file " + e.alignment_path);
      }
    }
    if (e.split == Split::kTrain && e.alignment_path.empty() && e.text.empty()) {
      throw IngestionError(where + ": training entry has neither alignment nor text");
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

inline json to_json(const ManifestEntry& e) {
  json j{{"id", e.id}, {"wav_path", e.wav_path}, {"split", e.split == Split::kTrain ? "train" : "test"}};
  if (!e.alignment_path.empty()) j["alignment_path"] = e.alignment_path;
  if (!e.text.empty()) j["text"] = e.text;
  return j;
}

// Frame-rate phoneme track for an entry: its alignment when present,
// otherwise its text spread uniformly over the waveform.
inline std::vector<int> conditioning_track(const ManifestEntry& e, std::size_t samples,
                                           const ModelSpec& spec,
                                           const text::PronunciationDictionary* dict) {
  const text::PhonemeInventory inventory(spec.inventory);
  if (!e.alignment_path.empty()) {
    return text::load_alignment(e.alignment_path, spec.hop, inventory, samples,
                                text::AlignmentFormat::kAuto, spec.sample_rate)
        .frames;
  }
  if (e.text.empty()) throw IngestionError("entry " + e.id + " has neither alignment nor text");
  if (!dict) throw ConfigError("text entries need a pronunciation dictionary");
  const auto phonemes = text::text_to_phonemes(e.text, *dict, inventory);
  return text::uniform_align(phonemes, text::frames_for(samples, spec.hop), spec.hop).frames;
}

}  // namespace sbtts::config
