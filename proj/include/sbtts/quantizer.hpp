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

// Per-stream amplitude normalization and mu-law companding onto the
// generator's categorical output domain.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"

namespace sbtts::quant {

struct QuantizerSpec {
  int mu = 255;
  int classes = 256;
  double gain = 1.0;

  static QuantizerSpec with_mu(int mu, double gain = 1.0) {
    if (mu < 1) throw ConfigError("mu must be >= 1");
    if (!(gain > 0.0)) throw ConfigError("quantizer gain must be positive");
    return {mu, mu + 1, gain};
  }
};

// Samples that fell outside [-1, 1] after gain division since process start.
inline std::atomic<std::uint64_t>& clamp_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

// Max-abs with 1% headroom so normalized samples sit strictly inside [-1, 1].
inline double fit_gain(std::span<const double> stream) {
  double peak = 0.0;
  for (double v : stream) peak = std::max(peak, std::abs(v));
  return peak > 0.0 ? peak * 1.01 : 1.0;
}

inline double compress(double x, int mu) {
  return std::copysign(std::log1p(mu * std::abs(x)) / std::log1p(static_cast<double>(mu)), x);
}

inline double expand(double y, int mu) {
  return std::copysign(std::expm1(std::abs(y) * std::log1p(static_cast<double>(mu))) / mu, y);
}

// x is already gain-normalized.
inline int encode(double x, const QuantizerSpec& spec) {
  if (std::isnan(x)) x = 0.0;
  if (x > 1.0 || x < -1.0) {
    clamp_counter().fetch_add(1, std::memory_order_relaxed);
    x = std::clamp(x, -1.0, 1.0);
  }
  const double f = compress(x, spec.mu);
  const int q = static_cast<int>(std::floor((f + 1.0) / 2.0 * (spec.classes - 1) + 0.5));
  return std::clamp(q, 0, spec.classes - 1);
}

// Bin center of class q, inverse companded.
inline double decode(int q, const QuantizerSpec& spec) {
  if (q < 0 || q >= spec.classes) {
    throw StructuralError("class index " + std::to_string(q) + " outside [0, " +
                          std::to_string(spec.classes) + ")");
  }
  const double y = 2.0 * q / (spec.classes - 1) - 1.0;
  return expand(y, spec.mu);
}

inline std::vector<int> encode_stream(std::span<const double> stream, const QuantizerSpec& spec) {
  std::vector<int> out(stream.size());
  for (std::size_t i = 0; i < stream.size(); ++i) out[i] = encode(stream[i] / spec.gain, spec);
  return out;
}

inline std::vector<double> decode_stream(std::span<const int> classes, const QuantizerSpec& spec) {
  std::vector<double> out(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) out[i] = decode(classes[i], spec) * spec.gain;
  return out;
}

}  // namespace sbtts::quant
