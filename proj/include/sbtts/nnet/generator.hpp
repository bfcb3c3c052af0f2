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

// Autoregressive subband generator: class embedding, a stack of gated
// dilated residual blocks, and a two-layer skip head producing logits over
// the quantizer classes.
#pragma once

#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"
#include "sbtts/nnet/kernels.hpp"
#include "sbtts/nnet/layers.hpp"

namespace sbtts::nn {

struct GeneratorConfig {
  Index channels = 256;       // residual = dilation = skip channels
  Index classes = 256;        // quantizer classes
  Index cond_channels = 256;  // encoder output channels
  std::vector<Index> dilations{1, 2, 4, 8, 16};
};

// Samples of past input that can influence one prediction, counting the
// one-sample causal shift at the input.
inline Index receptive_field(std::span<const Index> dilations) {
  return 1 + std::accumulate(dilations.begin(), dilations.end(), Index{0});
}

// r repeats of 1, 2, ..., 2^(n-1).
inline std::vector<Index> dilation_stacks(Index repeats, Index per_stack) {
  std::vector<Index> out;
  for (Index r = 0; r < repeats; ++r) {
    for (Index i = 0; i < per_stack; ++i) out.push_back(Index{1} << i);
  }
  return out;
}

template <class T>
struct GeneratorModel {
  Mat<T> embed;       // C x classes; column k embeds previous-sample class k
  Mat<T> embed_bias;  // C x 1
  std::vector<DilatedLayer<T>> layers;
  Mat<T> head1;       // C x C
  Mat<T> head1_bias;  // C x 1
  Mat<T> head2;       // classes x C
  Mat<T> head2_bias;  // classes x 1

  Index channels() const { return embed.rows(); }
  Index classes() const { return embed.cols(); }
  Index cond_channels() const { return layers.empty() ? 0 : layers.front().cond_channels(); }

  std::vector<Index> dilations() const {
    std::vector<Index> d;
    for (const auto& l : layers) d.push_back(l.dilation);
    return d;
  }

  static GeneratorModel zeros(const GeneratorConfig& cfg) {
    if (cfg.channels < 1 || cfg.classes < 2 || cfg.cond_channels < 1 || cfg.dilations.empty()) {
      throw ConfigError("generator needs channels >= 1, classes >= 2 and at least one layer");
    }
    GeneratorModel m;
    m.embed = Mat<T>::Zero(cfg.channels, cfg.classes);
    m.embed_bias = Mat<T>::Zero(cfg.channels, 1);
    for (Index d : cfg.dilations) {
      m.layers.push_back(DilatedLayer<T>::zeros(cfg.channels, cfg.cond_channels, d));
    }
    m.head1 = Mat<T>::Zero(cfg.channels, cfg.channels);
    m.head1_bias = Mat<T>::Zero(cfg.channels, 1);
    m.head2 = Mat<T>::Zero(cfg.classes, cfg.channels);
    m.head2_bias = Mat<T>::Zero(cfg.classes, 1);
    return m;
  }

  static GeneratorModel random(const GeneratorConfig& cfg, SplitMix64& rng) {
    GeneratorModel m = zeros(cfg);
    init_fan_in(m.embed, 1, rng, 0.5);
    for (auto& l : m.layers) l.init(rng);
    init_fan_in(m.head1, m.channels(), rng);
    init_fan_in(m.head2, m.channels(), rng);
    return m;
  }

  template <class F>
  void for_each(const std::string& prefix, F&& f) {
    f(prefix + "embed", embed);
    f(prefix + "embed_bias", embed_bias);
    for (std::size_t k = 0; k < layers.size(); ++k) {
      layers[k].for_each(prefix + "layer" + std::to_string(k) + ".", f);
    }
    f(prefix + "head1", head1);
    f(prefix + "head1_bias", head1_bias);
    f(prefix + "head2", head2);
    f(prefix + "head2_bias", head2_bias);
  }
};

template <class T>
struct GeneratorTrace {
  std::vector<int> inputs;  // class fed at each step, -1 at t = 0
  std::vector<GatedTrace<T>> layers;
  Mat<T> skip_sum;
  Mat<T> head_pre;  // head1 pre-activation
  Mat<T> logits;
};

namespace detail {

template <class T>
void check_classes(const GeneratorModel<T>& model, std::span<const int> classes) {
  for (int c : classes) {
    if (c < 0 || c >= model.classes()) {
      throw StructuralError("class index " + std::to_string(c) + " outside [0, " +
                            std::to_string(model.classes()) + ")");
    }
  }
}

// x0[:, t] = embed_bias + embed[:, prev]; just the bias when there is no
// previous sample.
template <class T>
void embed_column(const GeneratorModel<T>& model, int prev, T* out) {
  const Index c = model.channels();
  if (prev < 0) {
    for (Index r = 0; r < c; ++r) out[r] = model.embed_bias(r, 0);
  } else {
    const T* e = model.embed.data() + static_cast<Index>(prev) * c;
    for (Index r = 0; r < c; ++r) out[r] = model.embed_bias(r, 0) + e[r];
  }
}

// logits = head2_bias + head2 relu(head1_bias + head1 relu(skip_sum)).
template <class T>
void head_columns(const GeneratorModel<T>& model, const T* skip_sum, Index ncols, T* head_pre,
                  T* logits, std::vector<T>& scratch) {
  const Index c = model.channels();
  const Index k = model.classes();
  scratch.resize(static_cast<std::size_t>(c * ncols));
  for (Index i = 0; i < c * ncols; ++i) scratch[i] = kernel::relu(skip_sum[i]);
  for (Index j = 0; j < ncols; ++j) {
    for (Index r = 0; r < c; ++r) head_pre[j * c + r] = model.head1_bias(r, 0);
  }
  kernel::gemm_acc(model.head1.data(), c, c, scratch.data(), c, ncols, head_pre, c);
  for (Index i = 0; i < c * ncols; ++i) scratch[i] = kernel::relu(head_pre[i]);
  for (Index j = 0; j < ncols; ++j) {
    for (Index r = 0; r < k; ++r) logits[j * k + r] = model.head2_bias(r, 0);
  }
  kernel::gemm_acc(model.head2.data(), k, c, scratch.data(), c, ncols, logits, k);
}

}  // namespace detail

// Parallel teacher-forced pass. logits[:, t] is the prediction of
// x_classes[t] from x_classes[< t] and h up to frame(t). h is frame rate.
template <class T>
Mat<T> forward_teacher(const GeneratorModel<T>& model, std::span<const int> x_classes,
                       const Mat<T>& h, Index hop, GeneratorTrace<T>* trace = nullptr) {
  detail::check_classes(model, x_classes);
  const Index t = static_cast<Index>(x_classes.size());
  const Index c = model.channels();
  check_alignment(t, h.cols(), hop);

  Mat<T> x(c, t);
  for (Index j = 0; j < t; ++j) {
    detail::embed_column(model, j == 0 ? -1 : x_classes[j - 1], x.data() + j * c);
  }
  if (trace) {
    trace->inputs.assign(static_cast<std::size_t>(t), -1);
    for (Index j = 1; j < t; ++j) trace->inputs[j] = x_classes[j - 1];
    trace->layers.clear();
  }

  Mat<T> skip_sum;
  Mat<T> residual, skip;
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    GatedTrace<T> lt;
    gated_unit(model.layers[k], x, h, hop, residual, skip, trace ? &lt : nullptr);
    if (k == 0) {
      skip_sum = skip;
    } else {
      skip_sum += skip;
    }
    if (trace) trace->layers.push_back(std::move(lt));
    x.swap(residual);
  }

  Mat<T> head_pre(c, t);
  Mat<T> logits(model.classes(), t);
  std::vector<T> scratch;
  detail::head_columns(model, skip_sum.data(), t, head_pre.data(), logits.data(), scratch);
  if (trace) {
    trace->skip_sum = std::move(skip_sum);
    trace->head_pre = std::move(head_pre);
    trace->logits = logits;
  }
  return logits;
}

// Backpropagates dL/dlogits through a traced forward pass. Gradients are
// accumulated into `grads`; dL/dh (frame rate) is added to `dh`.
template <class T>
void generator_backward(const GeneratorModel<T>& model, const GeneratorTrace<T>& tr,
                        const Mat<T>& h, Index hop, const Mat<T>& dlogits,
                        GeneratorModel<T>& grads, Mat<T>& dh) {
  const Index c = model.channels();
  const Index t = dlogits.cols();
  const Mat<T> y1 = tr.skip_sum.unaryExpr([](T v) { return kernel::relu(v); });
  const Mat<T> y2 = tr.head_pre.unaryExpr([](T v) { return kernel::relu(v); });

  grads.head2.noalias() += dlogits * y2.transpose();
  grads.head2_bias += detail::row_sums(dlogits);
  Mat<T> d_head = model.head2.transpose() * dlogits;
  for (Index i = 0; i < d_head.size(); ++i) {
    if (!(tr.head_pre.data()[i] > T(0))) d_head.data()[i] = T(0);
  }
  grads.head1.noalias() += d_head * y1.transpose();
  grads.head1_bias += detail::row_sums(d_head);
  Mat<T> d_skip = model.head1.transpose() * d_head;
  for (Index i = 0; i < d_skip.size(); ++i) {
    if (!(tr.skip_sum.data()[i] > T(0))) d_skip.data()[i] = T(0);
  }

  Mat<T> dx = Mat<T>::Zero(c, t);
  for (Index k = static_cast<Index>(model.layers.size()) - 1; k >= 0; --k) {
    dx = gated_unit_backward(model.layers[k], tr.layers[k], h, hop, dx, d_skip, grads.layers[k], dh);
  }

  grads.embed_bias += detail::row_sums(dx);
  for (Index j = 0; j < t; ++j) {
    const int prev = tr.inputs[j];
    if (prev >= 0) grads.embed.col(prev) += dx.col(j);
  }
}

}  // namespace sbtts::nn
