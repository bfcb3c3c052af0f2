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

// Joint training of the shared encoder and every stream generator under the
// summed per-stream cross-entropy, optimized with Adam and a step-decay
// learning rate.
#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"
#include "sbtts/model.hpp"
#include "sbtts/nnet/generator.hpp"
#include "sbtts/parallel.hpp"

namespace sbtts::train {

using nn::Index;
using nn::Mat;

struct TrainConfig {
  double lr0 = 1e-3;
  std::int64_t decay_every = 50000;
  double decay_factor = 0.5;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int batch = 1;
  std::uint64_t seed = 1;
  std::int64_t max_iters = 200000;
  std::int64_t crop = 4000;            // samples per training crop
  std::int64_t checkpoint_every = 0;   // 0 disables periodic checkpoints
  double grad_clip = 0.0;              // global-norm threshold, 0 disables
  std::int64_t log_every = 1;
  unsigned threads = 1;

  void validate() const {
    if (!(lr0 > 0) || decay_every < 1 || !(decay_factor > 0 && decay_factor < 1) ||
        !(adam_beta1 > 0 && adam_beta1 < 1) || !(adam_beta2 > 0 && adam_beta2 < 1) ||
        !(adam_eps > 0) || batch < 1 || max_iters < 1 || crop < 2 || checkpoint_every < 0 ||
        grad_clip < 0 || log_every < 1) {
      throw ConfigError("invalid training configuration");
    }
  }
};

inline void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"lr0", c.lr0},
                     {"decay_every", c.decay_every},
                     {"decay_factor", c.decay_factor},
                     {"adam_beta1", c.adam_beta1},
                     {"adam_beta2", c.adam_beta2},
                     {"adam_eps", c.adam_eps},
                     {"batch", c.batch},
                     {"seed", c.seed},
                     {"max_iters", c.max_iters},
                     {"crop", c.crop},
                     {"checkpoint_every", c.checkpoint_every},
                     {"grad_clip", c.grad_clip},
                     {"log_every", c.log_every},
                     {"threads", c.threads}};
}

// lr0 * decay_factor^floor(iteration / decay_every)
inline double learning_rate(const TrainConfig& c, std::int64_t iteration) {
  return c.lr0 * std::pow(c.decay_factor, static_cast<double>(iteration / c.decay_every));
}

struct LossBreakdown {
  double total = 0.0;
  std::vector<double> per_stream;
};

// Mean over time of -log softmax(logits)[target]. When `grad` is given it is
// filled with scale * (softmax - onehot).
template <class T>
double stream_cross_entropy(const Mat<T>& logits, std::span<const int> targets,
                            Mat<T>* grad = nullptr, double scale = 1.0) {
  if (logits.cols() != static_cast<Index>(targets.size())) {
    throw StructuralError("logits cover " + std::to_string(logits.cols()) + " steps, targets " +
                          std::to_string(targets.size()));
  }
  const Index k = logits.rows();
  const Index t = logits.cols();
  if (grad) grad->resize(k, t);
  std::vector<T> lp(static_cast<std::size_t>(k));
  double total = 0.0;
  for (Index j = 0; j < t; ++j) {
    const int target = targets[j];
    if (target < 0 || target >= k) throw StructuralError("target class out of range");
    nn::log_softmax(logits.col(j).data(), k, lp.data());
    total -= static_cast<double>(lp[target]);
    if (grad) {
      for (Index r = 0; r < k; ++r) (*grad)(r, j) = static_cast<T>(scale) * std::exp(lp[r]);
      (*grad)(target, j) -= static_cast<T>(scale);
    }
  }
  return t == 0 ? 0.0 : total / static_cast<double>(t);
}

// Sum over streams of the per-stream mean cross-entropy.
template <class T>
LossBreakdown subband_loss(const std::vector<Mat<T>>& logits,
                           const std::vector<std::span<const int>>& targets) {
  if (logits.size() != targets.size()) {
    throw StructuralError("got " + std::to_string(logits.size()) + " logit sets for " +
                          std::to_string(targets.size()) + " target streams");
  }
  LossBreakdown out;
  for (std::size_t s = 0; s < logits.size(); ++s) {
    out.per_stream.push_back(stream_cross_entropy(logits[s], targets[s]));
    out.total += out.per_stream.back();
  }
  return out;
}

template <class T>
struct AdamState {
  std::vector<Mat<T>> m;
  std::vector<Mat<T>> v;
};

// One bias-corrected Adam update at 1-based step `iteration`, with the
// learning rate of that step.
template <class T>
void adam_step(const std::vector<nn::NamedTensor<T>>& params,
               const std::vector<nn::NamedTensor<T>>& grads, AdamState<T>& state,
               const TrainConfig& config, std::int64_t iteration) {
  if (params.size() != grads.size()) throw StructuralError("parameter/gradient count mismatch");
  if (iteration < 1) throw ConfigError("Adam iteration must be >= 1");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.push_back(Mat<T>::Zero(p.value->rows(), p.value->cols()));
      state.v.push_back(Mat<T>::Zero(p.value->rows(), p.value->cols()));
    }
  }
  for (const auto& g : grads) {
    if (!g.value->allFinite()) throw NumericalError("non-finite gradient in tensor " + g.name);
  }
  const double lr = learning_rate(config, iteration);
  const double b1 = config.adam_beta1, b2 = config.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(iteration));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(iteration));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Mat<T>& p = *params[i].value;
    const Mat<T>& g = *grads[i].value;
    if (p.rows() != g.rows() || p.cols() != g.cols()) {
      throw StructuralError("gradient shape mismatch for " + params[i].name);
    }
    Mat<T>& m = state.m[i];
    Mat<T>& v = state.v[i];
    for (Index j = 0; j < p.size(); ++j) {
      const double gj = g.data()[j];
      const double mj = b1 * m.data()[j] + (1.0 - b1) * gj;
      const double vj = b2 * v.data()[j] + (1.0 - b2) * gj * gj;
      m.data()[j] = static_cast<T>(mj);
      v.data()[j] = static_cast<T>(vj);
      const double update = lr * (mj / c1) / (std::sqrt(vj / c2) + config.adam_eps);
      p.data()[j] = static_cast<T>(p.data()[j] - update);
    }
  }
}

// One utterance ready for training: quantized target classes per stream and
// the frame-rate phoneme track.
struct TrainingUtterance {
  std::string id;
  std::vector<std::vector<int>> targets;
  std::vector<int> phonemes;

  std::size_t samples() const { return targets.empty() ? 0 : targets.front().size(); }
};

inline TrainingUtterance make_training_utterance(const StreamCodec& codec, std::string id,
                                                 std::span<const double> signal,
                                                 std::vector<int> phoneme_frames) {
  TrainingUtterance u;
  u.id = std::move(id);
  u.targets = codec.quantize(codec.split(signal));
  u.phonemes = std::move(phoneme_frames);
  return u;
}

// A crop of one utterance: samples [offset, offset + length), offset a
// multiple of the hop so frames stay aligned.
struct Crop {
  std::size_t utterance = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
};

template <class T>
class Trainer {
 public:
  using StepCallback = std::function<void(std::int64_t iteration, double lr, const LossBreakdown&)>;

  Trainer(const ModelSpec& spec, SubbandModel<T>& model, TrainConfig config,
          std::vector<TrainingUtterance> data)
      : spec_(spec), model_(model), config_(std::move(config)), rng_(config_.seed) {
    config_.validate();
    spec_.validate();
    if (data.empty()) throw ConfigError("training manifest is empty");
    const Index rf = nn::receptive_field(std::span<const Index>(spec_.dilations));
    for (auto& u : data) {
      if (u.targets.size() != spec_.stream_count()) {
        throw StructuralError("utterance " + u.id + " has " + std::to_string(u.targets.size()) +
                              " streams, model expects " + std::to_string(spec_.stream_count()));
      }
      if (static_cast<Index>(u.samples()) < rf) {
        warn("skipping utterance " + u.id + ": shorter than the receptive field (" +
             std::to_string(rf) + " samples)");
        continue;
      }
      if (u.phonemes.empty()) {
        warn("skipping utterance " + u.id + ": empty conditioning track");
        continue;
      }
      nn::check_alignment(static_cast<Index>(u.samples()), static_cast<Index>(u.phonemes.size()),
                          spec_.hop);
      data_.push_back(std::move(u));
    }
    if (data_.empty()) throw ConfigError("no usable training utterances");
    grads_ = SubbandModel<T>::zeros(spec_);
  }

  std::int64_t iteration() const { return iteration_; }
  const std::vector<double>& loss_history() const { return history_; }
  const TrainConfig& config() const { return config_; }

  Crop draw_crop() {
    Crop c;
    c.utterance = static_cast<std::size_t>(rng_.next() % data_.size());
    const std::size_t n = data_[c.utterance].samples();
    const std::size_t hop = static_cast<std::size_t>(spec_.hop);
    if (n <= static_cast<std::size_t>(config_.crop)) {
      c.offset = 0;
      c.length = n;
    } else {
      const std::size_t slots = (n - static_cast<std::size_t>(config_.crop)) / hop + 1;
      c.offset = static_cast<std::size_t>(rng_.next() % slots) * hop;
      c.length = static_cast<std::size_t>(config_.crop);
    }
    return c;
  }

  // Loss and gradients (into grads()) for a set of crops, without updating.
  LossBreakdown compute_gradients(const std::vector<Crop>& crops) {
    grads_.set_zero();
    LossBreakdown total;
    total.per_stream.assign(spec_.stream_count(), 0.0);
    const double batch_scale = 1.0 / static_cast<double>(crops.size());
    for (const Crop& crop : crops) {
      const TrainingUtterance& u = data_.at(crop.utterance);
      nn::EncoderTrace<T> enc_trace;
      const Mat<T> h_full = nn::encode_condition(model_.encoder, u.phonemes, &enc_trace);
      const Index hop = spec_.hop;
      const Index f0 = std::min<Index>(static_cast<Index>(crop.offset) / hop, h_full.cols() - 1);
      const Index need = (static_cast<Index>(crop.length) + hop - 1) / hop;
      const Index nf = std::max<Index>(1, std::min<Index>(need, h_full.cols() - f0));
      const Mat<T> h = h_full.middleCols(f0, nf);

      std::vector<Mat<T>> dh(spec_.stream_count());
      std::vector<double> losses(spec_.stream_count(), 0.0);
      parallel_for(spec_.stream_count(), config_.threads, [&](std::size_t s) {
        std::span<const int> target(u.targets[s].data() + crop.offset, crop.length);
        nn::GeneratorTrace<T> trace;
        const Mat<T> logits = nn::forward_teacher(model_.generators[s], target, h, hop, &trace);
        Mat<T> dlogits;
        losses[s] = stream_cross_entropy(logits, target, &dlogits,
                                         batch_scale / static_cast<double>(crop.length));
        dh[s] = Mat<T>::Zero(h.rows(), h.cols());
        nn::generator_backward(model_.generators[s], trace, h, hop, dlogits, grads_.generators[s],
                               dh[s]);
      });
      // Fixed stream order keeps the encoder gradient independent of threading.
      Mat<T> dh_full = Mat<T>::Zero(h_full.rows(), h_full.cols());
      for (std::size_t s = 0; s < dh.size(); ++s) {
        dh_full.middleCols(f0, nf) += dh[s];
        total.per_stream[s] += losses[s] * batch_scale;
        total.total += losses[s] * batch_scale;
      }
      nn::encoder_backward(model_.encoder, enc_trace, dh_full, grads_.encoder);
    }
    return total;
  }

  LossBreakdown step() {
    std::vector<Crop> crops;
    for (int b = 0; b < config_.batch; ++b) crops.push_back(draw_crop());
    LossBreakdown loss = compute_gradients(crops);
    if (!std::isfinite(loss.total)) {
      throw NumericalError("non-finite loss at iteration " + std::to_string(iteration_ + 1));
    }
    if (config_.grad_clip > 0.0) clip_gradients();
    ++iteration_;
    adam_step(model_.tensors(), grads_.tensors(), adam_, config_, iteration_);
    history_.push_back(loss.total);
    return loss;
  }

  void run(const StepCallback& on_step = {}) {
    while (iteration_ < config_.max_iters) {
      const LossBreakdown loss = step();
      if (on_step) on_step(iteration_, learning_rate(config_, iteration_), loss);
    }
  }

  SubbandModel<T>& grads() { return grads_; }
  const std::vector<TrainingUtterance>& data() const { return data_; }

 private:
  void clip_gradients() {
    double sq = 0.0;
    grads_.for_each([&](const std::string&, Mat<T>& g) { sq += g.squaredNorm(); });
    const double norm = std::sqrt(sq);
    if (norm > config_.grad_clip) {
      const T scale = static_cast<T>(config_.grad_clip / norm);
      grads_.for_each([&](const std::string&, Mat<T>& g) { g *= scale; });
    }
  }

  ModelSpec spec_;
  SubbandModel<T>& model_;
  TrainConfig config_;
  nn::SplitMix64 rng_;
  std::vector<TrainingUtterance> data_;
  SubbandModel<T> grads_;
  AdamState<T> adam_;
  std::int64_t iteration_ = 0;
  std::vector<double> history_;
};

// FNV-1a over the bytes of the loss history.
inline std::uint64_t loss_digest(const std::vector<double>& history) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : history) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(&v);
    for (std::size_t i = 0; i < sizeof(double); ++i) h = (h ^ bytes[i]) * 1099511628211ULL;
  }
  return h;
}

inline void write_log_header(std::ostream& out, std::size_t streams) {
  out << "iteration,lr,total";
  for (std::size_t s = 0; s < streams; ++s) out << ",stream" << s;
  out << '\n';
}

inline void write_log_row(std::ostream& out, std::int64_t iteration, double lr,
                          const LossBreakdown& loss) {
  out << iteration << ',' << lr << ',' << loss.total;
  for (double v : loss.per_stream) out << ',' << v;
  out << '\n';
}

}  // namespace sbtts::train
