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

// Layer building blocks: causal dilated convolution, the gated residual unit
// with local conditioning, and the phoneme encoder. Each forward has a
// matching backward that accumulates parameter gradients.
#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"
#include "sbtts/nnet/kernels.hpp"

namespace sbtts::nn {

// y[:, t] = tap_past * x[:, t - d] + tap_now * x[:, t], x[:, t < 0] = 0.
template <class T>
Mat<T> causal_dilated_conv(const Mat<T>& x, const Mat<T>& tap_past, const Mat<T>& tap_now,
                           Index dilation) {
  if (tap_past.cols() != x.rows() || tap_now.cols() != x.rows() ||
      tap_past.rows() != tap_now.rows()) {
    throw StructuralError("causal_dilated_conv: weight/input channel mismatch");
  }
  if (dilation < 1) throw StructuralError("causal_dilated_conv: dilation must be >= 1");
  const Index t = x.cols();
  Mat<T> y = Mat<T>::Zero(tap_now.rows(), t);
  if (t > dilation) {
    kernel::gemm_acc(tap_past.data(), tap_past.rows(), tap_past.cols(), x.data(), x.rows(),
                     t - dilation, y.data() + dilation * y.rows(), y.rows());
  }
  kernel::gemm_acc(tap_now, x, y);
  return y;
}

// Accumulates tap gradients and returns dL/dx for causal_dilated_conv.
template <class T>
Mat<T> causal_dilated_conv_backward(const Mat<T>& x, const Mat<T>& tap_past, const Mat<T>& tap_now,
                                    Index dilation, const Mat<T>& dy, Mat<T>& g_past,
                                    Mat<T>& g_now) {
  const Index t = x.cols();
  g_now.noalias() += dy * x.transpose();
  Mat<T> dx = tap_now.transpose() * dy;
  if (t > dilation) {
    g_past.noalias() += dy.rightCols(t - dilation) * x.leftCols(t - dilation).transpose();
    dx.leftCols(t - dilation).noalias() += tap_past.transpose() * dy.rightCols(t - dilation);
  }
  return dx;
}

// Maps sample index to conditioning frame; samples past the last frame reuse it.
inline Index frame_of(Index t, Index hop, Index frames) {
  return std::min(t / hop, frames - 1);
}

// One residual block. Filter and gate paths are stacked: rows [0, C) are the
// filter path, rows [C, 2C) the gate path.
//   pre = bias + tap_past * x[t-d] + tap_now * x[t] + cond * h[frame(t)]
//   z   = tanh(pre_filter) * sigmoid(pre_gate)
//   residual_out = x + (res_bias + res * z)
//   skip_out     = skip_bias + skip * z
template <class T>
struct DilatedLayer {
  Index dilation = 1;
  Mat<T> tap_past;   // 2C x C
  Mat<T> tap_now;    // 2C x C
  Mat<T> bias;       // 2C x 1
  Mat<T> cond;       // 2C x H
  Mat<T> res;        // C x C
  Mat<T> res_bias;   // C x 1
  Mat<T> skip;       // C x C
  Mat<T> skip_bias;  // C x 1

  Index channels() const { return res.rows(); }
  Index cond_channels() const { return cond.cols(); }

  static DilatedLayer zeros(Index channels, Index cond_channels, Index dilation) {
    if (dilation < 1 || (dilation & (dilation - 1)) != 0) {
      throw ConfigError("dilation must be a positive power of two, got " + std::to_string(dilation));
    }
    DilatedLayer l;
    l.dilation = dilation;
    l.tap_past = Mat<T>::Zero(2 * channels, channels);
    l.tap_now = Mat<T>::Zero(2 * channels, channels);
    l.bias = Mat<T>::Zero(2 * channels, 1);
    l.cond = Mat<T>::Zero(2 * channels, cond_channels);
    l.res = Mat<T>::Zero(channels, channels);
    l.res_bias = Mat<T>::Zero(channels, 1);
    l.skip = Mat<T>::Zero(channels, channels);
    l.skip_bias = Mat<T>::Zero(channels, 1);
    return l;
  }

  void init(SplitMix64& rng) {
    const Index c = channels();
    init_fan_in(tap_past, 2 * c, rng);
    init_fan_in(tap_now, 2 * c, rng);
    init_fan_in(cond, std::max<Index>(1, cond_channels()), rng);
    init_fan_in(res, c, rng);
    init_fan_in(skip, c, rng);
  }

  template <class F>
  void for_each(const std::string& prefix, F&& f) {
    f(prefix + "tap_past", tap_past);
    f(prefix + "tap_now", tap_now);
    f(prefix + "bias", bias);
    f(prefix + "cond", cond);
    f(prefix + "res", res);
    f(prefix + "res_bias", res_bias);
    f(prefix + "skip", skip);
    f(prefix + "skip_bias", skip_bias);
  }
};

// cond * h at frame rate (2C x frames).
template <class T>
Mat<T> cond_projection(const DilatedLayer<T>& layer, const Mat<T>& h) {
  if (h.rows() != layer.cond_channels()) {
    throw StructuralError("conditioning has " + std::to_string(h.rows()) +
                          " channels, layer expects " + std::to_string(layer.cond_channels()));
  }
  Mat<T> cp = Mat<T>::Zero(layer.cond.rows(), h.cols());
  kernel::gemm_acc(layer.cond, h, cp);
  return cp;
}

namespace detail {

// Evaluates pre-activations and z for columns [0, ncols) whose past inputs
// are given explicitly. Shared verbatim by the batched and incremental paths.
template <class T>
void gated_columns(const DilatedLayer<T>& layer, const T* x, const T* x_past, Index ncols,
                   const Mat<T>& cond_proj, Index first_t, Index hop, T* pre, T* z) {
  const Index c = layer.channels();
  const Index c2 = 2 * c;
  for (Index j = 0; j < ncols; ++j) {
    for (Index r = 0; r < c2; ++r) pre[j * c2 + r] = layer.bias(r, 0);
  }
  kernel::gemm_acc(layer.tap_past.data(), c2, c, x_past, c, ncols, pre, c2);
  kernel::gemm_acc(layer.tap_now.data(), c2, c, x, c, ncols, pre, c2);
  for (Index j = 0; j < ncols; ++j) {
    const T* cp = cond_proj.data() + frame_of(first_t + j, hop, cond_proj.cols()) * c2;
    T* p = pre + j * c2;
    for (Index r = 0; r < c2; ++r) p[r] += cp[r];
    T* zc = z + j * c;
    for (Index r = 0; r < c; ++r) zc[r] = std::tanh(p[r]) * kernel::sigmoid(p[c + r]);
  }
}

// residual_out = x + (res_bias + res z); skip_out = skip_bias + skip z.
template <class T>
void project_columns(const DilatedLayer<T>& layer, const T* x, const T* z, Index ncols,
                     T* residual_out, T* skip_out) {
  const Index c = layer.channels();
  for (Index j = 0; j < ncols; ++j) {
    for (Index r = 0; r < c; ++r) {
      residual_out[j * c + r] = layer.res_bias(r, 0);
      skip_out[j * c + r] = layer.skip_bias(r, 0);
    }
  }
  kernel::gemm_acc(layer.res.data(), c, c, z, c, ncols, residual_out, c);
  kernel::gemm_acc(layer.skip.data(), c, c, z, c, ncols, skip_out, c);
  for (Index i = 0; i < ncols * c; ++i) residual_out[i] = x[i] + residual_out[i];
}

template <class T>
Mat<T> shift_right(const Mat<T>& x, Index d) {
  Mat<T> out = Mat<T>::Zero(x.rows(), x.cols());
  if (x.cols() > d) out.rightCols(x.cols() - d) = x.leftCols(x.cols() - d);
  return out;
}

// Sums sample-rate columns into their conditioning frames.
template <class T>
Mat<T> pool_to_frames(const Mat<T>& g, Index hop, Index frames) {
  Mat<T> out = Mat<T>::Zero(g.rows(), frames);
  for (Index t = 0; t < g.cols(); ++t) out.col(frame_of(t, hop, frames)) += g.col(t);
  return out;
}

template <class T>
Mat<T> row_sums(const Mat<T>& m) {
  return m.rowwise().sum();
}

}  // namespace detail

template <class T>
struct GatedTrace {
  Mat<T> x;    // C x T input
  Mat<T> pre;  // 2C x T
  Mat<T> z;    // C x T
};

// Conditioning must cover the samples to within one frame; extra trailing
// frames are ignored.
inline void check_alignment(Index samples, Index frames, Index hop) {
  if (hop < 1) throw ConfigError("hop must be >= 1");
  const Index need = (samples + hop - 1) / hop;
  if (frames < 1 || frames + 1 < need) {
    throw StructuralError("conditioning with " + std::to_string(frames) + " frames at hop " +
                          std::to_string(hop) + " is misaligned with " + std::to_string(samples) +
                          " samples");
  }
}

// h is frame-rate conditioning (cond_channels x frames); with hop == 1 it is
// sample aligned.
template <class T>
void gated_unit(const DilatedLayer<T>& layer, const Mat<T>& x, const Mat<T>& h, Index hop,
                Mat<T>& residual_out, Mat<T>& skip_out, GatedTrace<T>* trace = nullptr) {
  const Index c = layer.channels();
  if (x.rows() != c) throw StructuralError("gated_unit: input channel mismatch");
  check_alignment(x.cols(), h.cols(), hop);
  const Index t = x.cols();
  const Mat<T> cp = cond_projection(layer, h);
  const Mat<T> x_past = detail::shift_right(x, layer.dilation);
  Mat<T> pre(2 * c, t);
  Mat<T> z(c, t);
  detail::gated_columns(layer, x.data(), x_past.data(), t, cp, 0, hop, pre.data(), z.data());
  residual_out.resize(c, t);
  skip_out.resize(c, t);
  detail::project_columns(layer, x.data(), z.data(), t, residual_out.data(), skip_out.data());
  if (trace) {
    trace->x = x;
    trace->pre = std::move(pre);
    trace->z = std::move(z);
  }
}

// Accumulates parameter gradients into `grads` and returns dL/dx; dL/dh is
// added to `dh` (frame rate).
template <class T>
Mat<T> gated_unit_backward(const DilatedLayer<T>& layer, const GatedTrace<T>& tr, const Mat<T>& h,
                           Index hop, const Mat<T>& d_residual, const Mat<T>& d_skip,
                           DilatedLayer<T>& grads, Mat<T>& dh) {
  const Index c = layer.channels();
  const Index t = tr.x.cols();

  grads.res.noalias() += d_residual * tr.z.transpose();
  grads.res_bias += detail::row_sums(d_residual);
  grads.skip.noalias() += d_skip * tr.z.transpose();
  grads.skip_bias += detail::row_sums(d_skip);

  Mat<T> dz = layer.res.transpose() * d_residual;
  dz.noalias() += layer.skip.transpose() * d_skip;

  Mat<T> dpre(2 * c, t);
  for (Index j = 0; j < t; ++j) {
    for (Index r = 0; r < c; ++r) {
      const T th = std::tanh(tr.pre(r, j));
      const T sg = kernel::sigmoid(tr.pre(c + r, j));
      const T g = dz(r, j);
      dpre(r, j) = g * sg * (T(1) - th * th);
      dpre(c + r, j) = g * th * sg * (T(1) - sg);
    }
  }

  const Mat<T> x_past = detail::shift_right(tr.x, layer.dilation);
  grads.tap_now.noalias() += dpre * tr.x.transpose();
  grads.tap_past.noalias() += dpre * x_past.transpose();
  grads.bias += detail::row_sums(dpre);

  const Mat<T> pooled = detail::pool_to_frames(dpre, hop, h.cols());
  grads.cond.noalias() += pooled * h.transpose();
  dh.noalias() += layer.cond.transpose() * pooled;

  Mat<T> dx = d_residual;
  dx.noalias() += layer.tap_now.transpose() * dpre;
  const Mat<T> d_past = layer.tap_past.transpose() * dpre;
  const Index d = layer.dilation;
  if (t > d) dx.leftCols(t - d) += d_past.rightCols(t - d);
  return dx;
}

// Nearest-neighbour repetition of each frame `hop` times, trimmed or padded
// with the last frame to `length` samples (length 0 keeps frames * hop).
template <class T>
Mat<T> upsample_latents(const Mat<T>& h, Index hop, Index length = 0) {
  if (hop < 1) throw ConfigError("hop must be >= 1");
  if (length == 0) length = h.cols() * hop;
  Mat<T> out(h.rows(), length);
  if (h.cols() == 0) {
    out.setZero();
    return out;
  }
  for (Index t = 0; t < length; ++t) out.col(t) = h.col(frame_of(t, hop, h.cols()));
  return out;
}

// Three width-5 convolutions over frame-rate one-hot phoneme vectors with
// same padding. ReLU after the first two layers, tanh on the output.
template <class T>
struct Encoder {
  static constexpr Index kLayers = 3;
  static constexpr Index kWidth = 5;

  Index inputs = 70;
  Index channels = 256;
  std::vector<Mat<T>> weights;  // out x (kWidth * in); tap j in columns [j*in, (j+1)*in)
  std::vector<Mat<T>> biases;   // out x 1

  static Encoder zeros(Index inputs, Index channels) {
    Encoder e;
    e.inputs = inputs;
    e.channels = channels;
    for (Index l = 0; l < kLayers; ++l) {
      const Index in = l == 0 ? inputs : channels;
      e.weights.push_back(Mat<T>::Zero(channels, kWidth * in));
      e.biases.push_back(Mat<T>::Zero(channels, 1));
    }
    return e;
  }

  void init(SplitMix64& rng) {
    for (auto& w : weights) init_fan_in(w, w.cols(), rng);
  }

  template <class F>
  void for_each(const std::string& prefix, F&& f) {
    for (Index l = 0; l < kLayers; ++l) {
      f(prefix + "conv" + std::to_string(l) + ".weight", weights[l]);
      f(prefix + "conv" + std::to_string(l) + ".bias", biases[l]);
    }
  }
};

template <class T>
struct EncoderTrace {
  std::vector<Mat<T>> inputs;  // padded input of each layer, in x (F + 4)
  std::vector<Mat<T>> pre;     // out x F
  Mat<T> h;                    // final activation
};

namespace detail {

template <class T>
Mat<T> pad_frames(const Mat<T>& x, Index pad) {
  Mat<T> out = Mat<T>::Zero(x.rows(), x.cols() + 2 * pad);
  out.middleCols(pad, x.cols()) = x;
  return out;
}

}  // namespace detail

template <class T>
Mat<T> one_hot(const std::vector<int>& indices, Index classes) {
  Mat<T> out = Mat<T>::Zero(classes, static_cast<Index>(indices.size()));
  for (std::size_t f = 0; f < indices.size(); ++f) {
    const int k = indices[f];
    if (k < 0 || k >= classes) {
      throw FrontEndError("phoneme index " + std::to_string(k) + " outside inventory of " +
                          std::to_string(classes));
    }
    out(k, static_cast<Index>(f)) = T(1);
  }
  return out;
}

// Frame-rate latent track h (channels x frames).
template <class T>
Mat<T> encode_condition(const Encoder<T>& enc, const std::vector<int>& phonemes,
                        EncoderTrace<T>* trace = nullptr) {
  constexpr Index pad = Encoder<T>::kWidth / 2;
  Mat<T> x = one_hot<T>(phonemes, enc.inputs);
  const Index frames = x.cols();
  for (Index l = 0; l < Encoder<T>::kLayers; ++l) {
    const Mat<T> xp = detail::pad_frames(x, pad);
    const Index in = xp.rows();
    Mat<T> pre(enc.channels, frames);
    kernel::fill_bias(enc.biases[l], pre);
    for (Index j = 0; j < Encoder<T>::kWidth; ++j) {
      kernel::gemm_acc(enc.weights[l].data() + j * in * enc.channels, enc.channels, in,
                       xp.data() + j * in, in, frames, pre.data(), enc.channels);
    }
    Mat<T> act(enc.channels, frames);
    for (Index i = 0; i < pre.size(); ++i) {
      act.data()[i] = l + 1 < Encoder<T>::kLayers ? kernel::relu(pre.data()[i])
                                                  : std::tanh(pre.data()[i]);
    }
    if (trace) {
      trace->inputs.push_back(xp);
      trace->pre.push_back(pre);
    }
    x = std::move(act);
  }
  if (trace) trace->h = x;
  return x;
}

template <class T>
void encoder_backward(const Encoder<T>& enc, const EncoderTrace<T>& tr, const Mat<T>& dh,
                      Encoder<T>& grads) {
  constexpr Index pad = Encoder<T>::kWidth / 2;
  Mat<T> d_act = dh;
  for (Index l = Encoder<T>::kLayers - 1; l >= 0; --l) {
    const Mat<T>& pre = tr.pre[l];
    Mat<T> dpre(pre.rows(), pre.cols());
    for (Index i = 0; i < pre.size(); ++i) {
      const T p = pre.data()[i];
      const T g = d_act.data()[i];
      if (l + 1 < Encoder<T>::kLayers) {
        dpre.data()[i] = p > T(0) ? g : T(0);
      } else {
        const T th = std::tanh(p);
        dpre.data()[i] = g * (T(1) - th * th);
      }
    }
    const Mat<T>& xp = tr.inputs[l];
    const Index in = xp.rows();
    const Index frames = pre.cols();
    grads.biases[l] += detail::row_sums(dpre);
    Mat<T> dxp = Mat<T>::Zero(in, xp.cols());
    for (Index j = 0; j < Encoder<T>::kWidth; ++j) {
      auto wj = enc.weights[l].middleCols(j * in, in);
      grads.weights[l].middleCols(j * in, in).noalias() += dpre * xp.middleCols(j, frames).transpose();
      if (l > 0) dxp.middleCols(j, frames).noalias() += wj.transpose() * dpre;
    }
    if (l > 0) d_act = dxp.middleCols(pad, frames);
  }
}

}  // namespace sbtts::nn
