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

// Sample-by-sample generation. IncrementalGenerator keeps a ring buffer of
// past layer inputs per dilated layer (capacity = dilation), so each step
// costs O(layers * channels^2) regardless of how many samples came before.
// generate_naive re-runs the full teacher-forced pass at every step and
// exists only as the reference the cached path must match bit for bit.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"
#include "sbtts/nnet/generator.hpp"

namespace sbtts::fastgen {

using nn::Index;
using nn::Mat;

enum class SampleMode { kArgmax, kCategorical };

struct SamplerSpec {
  SampleMode mode = SampleMode::kArgmax;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

// Counter-based uniform in [0, 1): one draw per (seed, stream, step), so
// streams can be generated in any order or concurrently.
inline double uniform_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) {
  std::uint64_t z = seed ^ (stream * 0xD1B54A32D192ED03ULL) ^ (step * 0x9E3779B97F4A7C15ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

// Lowest index among maxima.
template <class T>
int argmax(const T* logits, Index n) {
  int best = 0;
  for (Index i = 1; i < n; ++i) {
    if (logits[i] > logits[best]) best = static_cast<int>(i);
  }
  return best;
}

template <class T>
int sample_class(const T* logits, Index n, const SamplerSpec& spec, double u) {
  if (!(spec.temperature > 0.0)) throw ConfigError("sampling temperature must be positive");
  if (spec.mode == SampleMode::kArgmax) return argmax(logits, n);
  const int best = argmax(logits, n);
  const double top = static_cast<double>(logits[best]);
  std::vector<double> p(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    p[i] = std::exp((static_cast<double>(logits[i]) - top) / spec.temperature);
    total += p[i];
  }
  const double target = u * total;
  double cum = 0.0;
  int last_nonzero = best;
  for (Index i = 0; i < n; ++i) {
    if (p[i] > 0.0) last_nonzero = static_cast<int>(i);
    cum += p[i];
    if (cum > target) return static_cast<int>(i);
  }
  return last_nonzero;
}

// Ring buffer of a layer's past inputs. The slot under the cursor holds the
// input from `dilation` steps ago (zero before that many steps exist).
template <class T>
struct LayerCache {
  Mat<T> buffer;  // C x dilation
  Index cursor = 0;

  LayerCache(Index channels, Index dilation) : buffer(Mat<T>::Zero(channels, dilation)) {}

  const T* past() const { return buffer.data() + cursor * buffer.rows(); }
  void push(const T* x) {
    std::copy(x, x + buffer.rows(), buffer.data() + cursor * buffer.rows());
    cursor = (cursor + 1) % buffer.cols();
  }
};

template <class T>
class IncrementalGenerator {
 public:
  // h is frame-rate conditioning; it must outlive the generator.
  IncrementalGenerator(const nn::GeneratorModel<T>& model, const Mat<T>& h, Index hop)
      : model_(model), hop_(hop) {
    if (hop < 1) throw ConfigError("hop must be >= 1");
    const Index c = model.channels();
    for (const auto& layer : model.layers) {
      cond_proj_.push_back(nn::cond_projection(layer, h));
      caches_.emplace_back(c, layer.dilation);
    }
    x_.resize(c);
    next_.resize(c);
    pre_.resize(2 * c);
    z_.resize(c);
    skip_.resize(c);
    skip_sum_.resize(c);
    head_pre_.resize(c);
    logits_.resize(model.classes());
  }

  Index position() const { return t_; }
  std::span<const T> logits() const { return logits_; }

  // Feeds the class of the previous sample (-1 at step 0) and returns the
  // logits for the current step.
  std::span<const T> step(int prev_class) {
    if ((t_ == 0) != (prev_class < 0)) {
      throw GenerationError("cache out of sync: step " + std::to_string(t_) +
                            (prev_class < 0 ? " got no previous sample" : " expects no input"));
    }
    if (prev_class >= model_.classes()) {
      throw StructuralError("class index " + std::to_string(prev_class) + " out of range");
    }
    const Index c = model_.channels();
    nn::detail::embed_column(model_, prev_class, x_.data());
    for (std::size_t k = 0; k < model_.layers.size(); ++k) {
      const auto& layer = model_.layers[k];
      auto& cache = caches_[k];
      nn::detail::gated_columns(layer, x_.data(), cache.past(), 1, cond_proj_[k], t_, hop_,
                                pre_.data(), z_.data());
      cache.push(x_.data());
      nn::detail::project_columns(layer, x_.data(), z_.data(), 1, next_.data(), skip_.data());
      if (k == 0) {
        std::copy(skip_.begin(), skip_.end(), skip_sum_.begin());
      } else {
        for (Index r = 0; r < c; ++r) skip_sum_[r] += skip_[r];
      }
      x_.swap(next_);
    }
    nn::detail::head_columns(model_, skip_sum_.data(), 1, head_pre_.data(), logits_.data(),
                             scratch_);
    ++t_;
    return logits_;
  }

 private:
  const nn::GeneratorModel<T>& model_;
  Index hop_;
  Index t_ = 0;
  std::vector<Mat<T>> cond_proj_;
  std::vector<LayerCache<T>> caches_;
  std::vector<T> x_, next_, pre_, z_, skip_, skip_sum_, head_pre_, logits_, scratch_;
};

struct GenerationRequest {
  Index steps = 0;
  Index hop = 1;
  SamplerSpec sampler;
  std::uint64_t stream = 0;  // substream index for the counter-based draws
  std::vector<int> primer;   // echoed verbatim as the first outputs
};

namespace detail {

template <class T>
void check_request(const nn::GeneratorModel<T>& model, const Mat<T>& h,
                   const GenerationRequest& req) {
  if (static_cast<Index>(req.primer.size()) > req.steps) {
    throw ConfigError("primer longer than the requested number of steps");
  }
  nn::detail::check_classes(model, req.primer);
  if (req.steps > 0) nn::check_alignment(req.steps, h.cols(), req.hop);
}

}  // namespace detail

template <class T>
std::vector<int> generate_fast(const nn::GeneratorModel<T>& model, const Mat<T>& h,
                               const GenerationRequest& req) {
  detail::check_request(model, h, req);
  IncrementalGenerator<T> gen(model, h, req.hop);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(req.steps));
  for (Index t = 0; t < req.steps; ++t) {
    const auto logits = gen.step(t == 0 ? -1 : out.back());
    if (t < static_cast<Index>(req.primer.size())) {
      out.push_back(req.primer[t]);
    } else {
      const double u = uniform_draw(req.sampler.seed, req.stream, static_cast<std::uint64_t>(t));
      out.push_back(sample_class(logits.data(), model.classes(), req.sampler, u));
    }
  }
  return out;
}

template <class T>
std::vector<int> generate_naive(const nn::GeneratorModel<T>& model, const Mat<T>& h,
                                const GenerationRequest& req) {
  detail::check_request(model, h, req);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(req.steps));
  std::vector<int> history;
  for (Index t = 0; t < req.steps; ++t) {
    if (t < static_cast<Index>(req.primer.size())) {
      out.push_back(req.primer[t]);
      continue;
    }
    // The value at position t never influences logits[t]; 0 is a placeholder.
    history.assign(out.begin(), out.end());
    history.push_back(0);
    const Mat<T> logits = nn::forward_teacher(model, std::span<const int>(history), h, req.hop);
    const double u = uniform_draw(req.sampler.seed, req.stream, static_cast<std::uint64_t>(t));
    out.push_back(sample_class(logits.col(t).data(), model.classes(), req.sampler, u));
  }
  return out;
}

// Teacher-forced logits through the cached path (inputs from `targets`).
template <class T>
Mat<T> incremental_teacher_logits(const nn::GeneratorModel<T>& model, const Mat<T>& h, Index hop,
                                  std::span<const int> targets) {
  IncrementalGenerator<T> gen(model, h, hop);
  Mat<T> out(model.classes(), static_cast<Index>(targets.size()));
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const auto logits = gen.step(t == 0 ? -1 : targets[t - 1]);
    std::copy(logits.begin(), logits.end(), out.col(static_cast<Index>(t)).data());
  }
  return out;
}

// Samples each column of precomputed logits (teacher-forcing resynthesis).
template <class T>
std::vector<int> sample_columns(const Mat<T>& logits, const SamplerSpec& sampler,
                                std::uint64_t stream) {
  std::vector<int> out(static_cast<std::size_t>(logits.cols()));
  for (Index t = 0; t < logits.cols(); ++t) {
    const double u = uniform_draw(sampler.seed, stream, static_cast<std::uint64_t>(t));
    out[t] = sample_class(logits.col(t).data(), logits.rows(), sampler, u);
  }
  return out;
}

}  // namespace sbtts::fastgen
