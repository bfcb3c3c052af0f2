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

// Model description shared by training, checkpoints and synthesis: how a
// waveform becomes modeled streams, and the network that models them.
#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"
#include "sbtts/nnet/generator.hpp"
#include "sbtts/nnet/layers.hpp"
#include "sbtts/quantizer.hpp"
#include "sbtts/textfront.hpp"
#include "sbtts/wavelet.hpp"

namespace sbtts {

using Signal = std::vector<double>;

struct ModelSpec {
  bool fullband = false;  // single stream, no wavelet decomposition
  int wavelet_order = 10;
  int levels = 8;
  int mu = 255;
  int hop = 80;  // samples per conditioning frame (5 ms at 16 kHz)
  double sample_rate = 16000.0;
  nn::Index channels = 256;
  nn::Index cond_channels = 256;
  std::vector<nn::Index> dilations{1, 2, 4, 8, 16};
  std::vector<double> gains;  // one per stream, fit on the training set
  std::vector<std::string> inventory = text::PhonemeInventory::standard().symbols();

  std::size_t stream_count() const { return fullband ? 1 : static_cast<std::size_t>(levels) + 1; }
  int classes() const { return mu + 1; }

  nn::GeneratorConfig generator_config() const {
    nn::GeneratorConfig cfg;
    cfg.channels = channels;
    cfg.classes = classes();
    cfg.cond_channels = cond_channels;
    cfg.dilations = dilations;
    return cfg;
  }

  quant::QuantizerSpec quantizer(std::size_t stream) const {
    const double gain = stream < gains.size() ? gains[stream] : 1.0;
    return quant::QuantizerSpec::with_mu(mu, gain);
  }

  void validate() const {
    if (!fullband && (levels < 1 || wavelet_order < wavelet::kMinOrder ||
                      wavelet_order > wavelet::kMaxOrder)) {
      throw ConfigError("invalid wavelet order/levels");
    }
    if (mu < 1 || hop < 1 || channels < 1 || cond_channels < 1 || dilations.empty()) {
      throw ConfigError("invalid model dimensions");
    }
    for (nn::Index d : dilations) {
      if (d < 1 || (d & (d - 1)) != 0) throw ConfigError("dilations must be powers of two");
    }
    if (!gains.empty() && gains.size() != stream_count()) {
      throw ConfigError("expected " + std::to_string(stream_count()) + " gains, got " +
                        std::to_string(gains.size()));
    }
    for (double g : gains) {
      if (!(g > 0.0)) throw ConfigError("gains must be positive");
    }
    if (inventory.size() != text::kInventorySize) throw ConfigError("inventory must have 70 symbols");
  }
};

inline void to_json(nlohmann::json& j, const ModelSpec& s) {
  j = nlohmann::json{{"fullband", s.fullband},     {"wavelet_order", s.wavelet_order},
                     {"levels", s.levels},         {"mu", s.mu},
                     {"hop", s.hop},               {"sample_rate", s.sample_rate},
                     {"channels", s.channels},     {"cond_channels", s.cond_channels},
                     {"dilations", s.dilations},   {"gains", s.gains},
                     {"inventory", s.inventory}};
}

inline void from_json(const nlohmann::json& j, ModelSpec& s) {
  j.at("fullband").get_to(s.fullband);
  j.at("wavelet_order").get_to(s.wavelet_order);
  j.at("levels").get_to(s.levels);
  j.at("mu").get_to(s.mu);
  j.at("hop").get_to(s.hop);
  j.at("sample_rate").get_to(s.sample_rate);
  j.at("channels").get_to(s.channels);
  j.at("cond_channels").get_to(s.cond_channels);
  j.at("dilations").get_to(s.dilations);
  j.at("gains").get_to(s.gains);
  j.at("inventory").get_to(s.inventory);
}

// Waveform <-> modeled streams. Subband order: details of levels 1..L, then
// the level-L approximation.
class StreamCodec {
 public:
  explicit StreamCodec(const ModelSpec& spec)
      : spec_(spec),
        filters_(spec.fullband ? wavelet::WaveletFilterPair{} : wavelet::db_filters(spec.wavelet_order)) {}

  const ModelSpec& spec() const { return spec_; }
  const wavelet::WaveletFilterPair& filters() const { return filters_; }

  std::vector<Signal> split(std::span<const double> signal) const {
    if (spec_.fullband) return {Signal(signal.begin(), signal.end())};
    auto set = wavelet::analyze(signal, spec_.levels, filters_);
    std::vector<Signal> out = std::move(set.details);
    out.push_back(std::move(set.approximation));
    return out;
  }

  Signal merge(const std::vector<Signal>& streams) const {
    if (streams.size() != spec_.stream_count()) {
      throw StructuralError("expected " + std::to_string(spec_.stream_count()) + " streams, got " +
                            std::to_string(streams.size()));
    }
    if (spec_.fullband) return streams[0];
    wavelet::SubbandSet set;
    set.levels = spec_.levels;
    set.details.assign(streams.begin(), streams.end() - 1);
    set.approximation = streams.back();
    set.gains = spec_.gains;
    return wavelet::synthesize(set, filters_);
  }

  std::vector<std::vector<int>> quantize(const std::vector<Signal>& streams) const {
    std::vector<std::vector<int>> out;
    for (std::size_t s = 0; s < streams.size(); ++s) {
      out.push_back(quant::encode_stream(streams[s], spec_.quantizer(s)));
    }
    return out;
  }

  std::vector<Signal> dequantize(const std::vector<std::vector<int>>& classes) const {
    std::vector<Signal> out;
    for (std::size_t s = 0; s < classes.size(); ++s) {
      out.push_back(quant::decode_stream(classes[s], spec_.quantizer(s)));
    }
    return out;
  }

 private:
  ModelSpec spec_;
  wavelet::WaveletFilterPair filters_;
};

// Corpus-global per-stream gain: max-abs over every utterance, 1% headroom.
inline std::vector<double> fit_corpus_gains(const StreamCodec& codec,
                                            const std::vector<Signal>& corpus) {
  std::vector<double> peak(codec.spec().stream_count(), 0.0);
  for (const auto& utt : corpus) {
    const auto streams = codec.split(utt);
    for (std::size_t s = 0; s < streams.size(); ++s) {
      for (double v : streams[s]) peak[s] = std::max(peak[s], std::abs(v));
    }
  }
  std::vector<double> gains;
  for (double p : peak) gains.push_back(p > 0.0 ? p * 1.01 : 1.0);
  return gains;
}

// Shared encoder plus one generator per stream.
template <class T>
struct SubbandModel {
  nn::Encoder<T> encoder;
  std::vector<nn::GeneratorModel<T>> generators;

  static SubbandModel zeros(const ModelSpec& spec) {
    SubbandModel m;
    m.encoder = nn::Encoder<T>::zeros(static_cast<nn::Index>(spec.inventory.size()), spec.cond_channels);
    for (std::size_t s = 0; s < spec.stream_count(); ++s) {
      m.generators.push_back(nn::GeneratorModel<T>::zeros(spec.generator_config()));
    }
    return m;
  }

  static SubbandModel random(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    SubbandModel m = zeros(spec);
    nn::SplitMix64 rng(seed);
    m.encoder.init(rng);
    for (auto& g : m.generators) g = nn::GeneratorModel<T>::random(spec.generator_config(), rng);
    return m;
  }

  template <class F>
  void for_each(F&& f) {
    encoder.for_each("encoder.", f);
    for (std::size_t s = 0; s < generators.size(); ++s) {
      generators[s].for_each("stream" + std::to_string(s) + ".", f);
    }
  }

  std::vector<nn::NamedTensor<T>> tensors() {
    std::vector<nn::NamedTensor<T>> out;
    for_each([&](const std::string& name, nn::Mat<T>& m) { out.push_back({name, &m}); });
    return out;
  }

  void set_zero() {
    for_each([](const std::string&, nn::Mat<T>& m) { m.setZero(); });
  }
};

}  // namespace sbtts
