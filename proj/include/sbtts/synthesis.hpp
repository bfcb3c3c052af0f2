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

// Waveform synthesis from a phoneme track: every stream is generated
// independently under the shared conditioning, dequantized and merged.
#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"
#include "sbtts/fastgen.hpp"
#include "sbtts/model.hpp"
#include "sbtts/nnet/generator.hpp"
#include "sbtts/parallel.hpp"

namespace sbtts::synth {

enum class Mode {
  kTeacherForced,  // logits from the natural stream history, then sampled
  kFree,           // autoregressive from the model's own samples
};

struct Options {
  Mode mode = Mode::kFree;
  fastgen::SamplerSpec sampler;
  unsigned threads = 1;
};

struct Result {
  Signal waveform;
  std::vector<std::vector<int>> classes;  // per stream
  double seconds = 0.0;
};

// `reference` holds the quantized natural streams and is required for
// teacher forcing; free running generates `samples` steps per stream.
template <class T>
Result synthesize_utterance(const ModelSpec& spec, const SubbandModel<T>& model,
                            const std::vector<int>& phoneme_frames, std::size_t samples,
                            const Options& options,
                            const std::vector<std::vector<int>>* reference = nullptr) {
  if (phoneme_frames.empty()) throw FrontEndError("empty phoneme track");
  if (samples == 0) throw ConfigError("requested zero output samples");
  const std::size_t streams = spec.stream_count();
  if (model.generators.size() != streams) {
    throw StructuralError("model has " + std::to_string(model.generators.size()) +
                          " generators, spec expects " + std::to_string(streams));
  }
  if (options.mode == Mode::kTeacherForced) {
    if (!reference || reference->size() != streams) {
      throw ConfigError("teacher-forced synthesis needs the natural streams");
    }
    for (const auto& r : *reference) {
      if (r.size() != samples) throw StructuralError("reference stream length mismatch");
    }
  }
  nn::check_alignment(static_cast<nn::Index>(samples), static_cast<nn::Index>(phoneme_frames.size()),
                      spec.hop);

  const auto start = std::chrono::steady_clock::now();
  const nn::Mat<T> h = nn::encode_condition(model.encoder, phoneme_frames);
  Result out;
  out.classes.resize(streams);
  parallel_for(streams, options.threads, [&](std::size_t s) {
    if (options.mode == Mode::kTeacherForced) {
      const auto logits =
          nn::forward_teacher(model.generators[s], std::span<const int>((*reference)[s]), h, spec.hop);
      out.classes[s] = fastgen::sample_columns(logits, options.sampler, s);
    } else {
      fastgen::GenerationRequest req;
      req.steps = static_cast<nn::Index>(samples);
      req.hop = spec.hop;
      req.sampler = options.sampler;
      req.stream = s;
      out.classes[s] = fastgen::generate_fast(model.generators[s], h, req);
    }
  });
  const StreamCodec codec(spec);
  out.waveform = codec.merge(codec.dequantize(out.classes));
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace sbtts::synth
