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

// Dense kernels shared by the batched (teacher-forced) and the incremental
// (one step at a time) evaluation paths.
//
// Every output element of gemm_acc is accumulated over the inner index in
// ascending order, whether it is computed inside a column tile or alone. With
// FMA contraction disabled this makes a one-column call bit-identical to the
// matching column of a many-column call, which is what lets the cached
// generator reproduce the full forward pass exactly.
#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace sbtts::nn {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;  // channels x time, column-major

using Index = Eigen::Index;

template <class T>
struct NamedTensor {
  std::string name;
  Mat<T>* value;
};

template <class T>
struct ConstNamedTensor {
  std::string name;
  const Mat<T>* value;
};

namespace kernel {

inline constexpr Index kRowBlock = 16;

// Y[:, c] += W * X[:, c] for c < ncols. W is rows x inner, column-major.
template <class T>
void gemm_acc(const T* __restrict w, Index rows, Index inner, const T* __restrict x, Index ldx,
              Index ncols, T* __restrict y, Index ldy) {
  Index c = 0;
  for (; c + 4 <= ncols; c += 4) {
    const T* x0 = x + c * ldx;
    const T* x1 = x0 + ldx;
    const T* x2 = x1 + ldx;
    const T* x3 = x2 + ldx;
    T* y0 = y + c * ldy;
    T* y1 = y0 + ldy;
    T* y2 = y1 + ldy;
    T* y3 = y2 + ldy;
    Index r0 = 0;
    for (; r0 + kRowBlock <= rows; r0 += kRowBlock) {
      T a0[kRowBlock], a1[kRowBlock], a2[kRowBlock], a3[kRowBlock];
      for (Index r = 0; r < kRowBlock; ++r) {
        a0[r] = y0[r0 + r];
        a1[r] = y1[r0 + r];
        a2[r] = y2[r0 + r];
        a3[r] = y3[r0 + r];
      }
      for (Index i = 0; i < inner; ++i) {
        const T* wc = w + i * rows + r0;
        const T b0 = x0[i], b1 = x1[i], b2 = x2[i], b3 = x3[i];
        for (Index r = 0; r < kRowBlock; ++r) {
          const T wr = wc[r];
          a0[r] += wr * b0;
          a1[r] += wr * b1;
          a2[r] += wr * b2;
          a3[r] += wr * b3;
        }
      }
      for (Index r = 0; r < kRowBlock; ++r) {
        y0[r0 + r] = a0[r];
        y1[r0 + r] = a1[r];
        y2[r0 + r] = a2[r];
        y3[r0 + r] = a3[r];
      }
    }
    for (Index r = r0; r < rows; ++r) {
      T a0 = y0[r], a1 = y1[r], a2 = y2[r], a3 = y3[r];
      for (Index i = 0; i < inner; ++i) {
        const T wr = w[i * rows + r];
        a0 += wr * x0[i];
        a1 += wr * x1[i];
        a2 += wr * x2[i];
        a3 += wr * x3[i];
      }
      y0[r] = a0;
      y1[r] = a1;
      y2[r] = a2;
      y3[r] = a3;
    }
  }
  for (; c < ncols; ++c) {
    const T* xc = x + c * ldx;
    T* yc = y + c * ldy;
    Index r0 = 0;
    for (; r0 + kRowBlock <= rows; r0 += kRowBlock) {
      T a[kRowBlock];
      for (Index r = 0; r < kRowBlock; ++r) a[r] = yc[r0 + r];
      for (Index i = 0; i < inner; ++i) {
        const T* wc = w + i * rows + r0;
        const T b = xc[i];
        for (Index r = 0; r < kRowBlock; ++r) a[r] += wc[r] * b;
      }
      for (Index r = 0; r < kRowBlock; ++r) yc[r0 + r] = a[r];
    }
    for (Index r = r0; r < rows; ++r) {
      T a = yc[r];
      for (Index i = 0; i < inner; ++i) a += w[i * rows + r] * xc[i];
      yc[r] = a;
    }
  }
}

// Y += W * X over all columns of X.
template <class T>
void gemm_acc(const Mat<T>& w, const Mat<T>& x, Mat<T>& y) {
  gemm_acc(w.data(), w.rows(), w.cols(), x.data(), x.rows(), x.cols(), y.data(), y.rows());
}

// Y[:, c] = bias for every column.
template <class T>
void fill_bias(const Mat<T>& bias, Mat<T>& y) {
  for (Index c = 0; c < y.cols(); ++c) y.col(c) = bias.col(0);
}

template <class T>
inline T sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

template <class T>
inline T relu(T v) {
  return v > T(0) ? v : T(0);
}

}  // namespace kernel

// Counter-free deterministic generator for initialization: splitmix64.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
template <class T>
void init_fan_in(Mat<T>& m, Index fan_in, SplitMix64& rng, double scale = 1.0) {
  const double bound = scale / std::sqrt(static_cast<double>(fan_in));
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
}

// Stable log-softmax of one logit column.
template <class T>
void log_softmax(const T* logits, Index n, T* out) {
  T m = logits[0];
  for (Index i = 1; i < n; ++i) m = logits[i] > m ? logits[i] : m;
  T s = 0;
  for (Index i = 0; i < n; ++i) s += std::exp(logits[i] - m);
  const T ls = std::log(s);
  for (Index i = 0; i < n; ++i) out[i] = logits[i] - m - ls;
}

}  // namespace sbtts::nn
