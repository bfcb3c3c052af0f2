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

// Undecimated (stationary) multi-level Daubechies wavelet transform.
//
// Conventions, fixed by the round-trip tests:
//  * Analysis is a circular convolution. At level l the base filter pair is
//    dilated by D = 2^(l-1) (a trous zero insertion), so
//        approx_l[t] = sum_k scaling[k] * approx_{l-1}[(t - k*D) mod n]
//        detail_l[t] = sum_k mother[k]  * approx_{l-1}[(t - k*D) mod n]
//    with approx_0 = input. An impulse at t0 therefore shows up as the
//    filter taps laid out forward from t0.
//  * Synthesis is the adjoint correlation averaged over both polyphases:
//        approx_{l-1}[t] = 1/2 sum_k (scaling[k] * approx_l[(t + k*D) mod n]
//                                   + mother[k]  * detail_l[(t + k*D) mod n])
//    which inverts the analysis exactly for any orthonormal pair.
#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"

namespace sbtts::wavelet {

using Signal = std::vector<double>;

struct WaveletFilterPair {
  Signal scaling;  // low-pass
  Signal mother;   // high-pass, mother[n] = (-1)^n scaling[len-1-n]
  int order = 0;   // Daubechies order N, 2N taps
};

// L detail streams and the level-L approximation, all sample aligned with the
// source. Gains are carried for the quantizer and never touched here.
struct SubbandSet {
  std::vector<Signal> details;
  Signal approximation;
  int levels = 0;
  std::vector<double> gains;
  // Level-1 detail holds only its even-indexed samples (see
  // downsample_level1). Off for the default redundant representation.
  bool level1_decimated = false;

  std::size_t length() const { return approximation.size(); }
  std::size_t stream_count() const { return details.size() + 1; }

  // Stream i < levels is details[i]; stream `levels` is the approximation.
  const Signal& stream(std::size_t i) const {
    return i < details.size() ? details[i] : approximation;
  }
  Signal& stream(std::size_t i) {
    return i < details.size() ? details[i] : approximation;
  }
};

inline constexpr int kMinOrder = 1;
inline constexpr int kMaxOrder = 20;

namespace detail {

using cld = std::complex<long double>;

inline long double binomial(int n, int k) {
  long double r = 1.0L;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline cld eval_poly(const std::vector<long double>& c, cld x) {
  cld acc = 0.0L;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline cld eval_dpoly(const std::vector<long double>& c, cld x) {
  cld acc = 0.0L;
  for (std::size_t i = c.size() - 1; i >= 1; --i) {
    acc = acc * x + static_cast<long double>(i) * c[i];
  }
  return acc;
}

// Roots of sum_i c[i] y^i via the companion matrix, Newton polished.
inline std::vector<cld> poly_roots(const std::vector<long double>& c) {
  const int deg = static_cast<int>(c.size()) - 1;
  if (deg < 1) return {};
  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  Mat comp = Mat::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0L;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
  Eigen::EigenSolver<Mat> solver(comp, false);
  std::vector<cld> roots;
  roots.reserve(deg);
  for (int i = 0; i < deg; ++i) {
    cld r = solver.eigenvalues()[i];
    for (int it = 0; it < 8; ++it) {
      const cld d = eval_dpoly(c, r);
      if (std::abs(d) == 0.0L) break;
      const cld step = eval_poly(c, r) / d;
      r -= step;
      if (std::abs(step) <= 1e-30L * std::max(1.0L, std::abs(r))) break;
    }
    roots.push_back(r);
  }
  return roots;
}

}  // namespace detail

// Orthonormal extremal-phase Daubechies pair of the given order, built by
// spectral factorization of the maxflat half-band polynomial. Order 1 is
// Haar.
inline WaveletFilterPair db_filters(int order) {
  if (order < kMinOrder || order > kMaxOrder) {
    throw ConfigError("unsupported Daubechies order " + std::to_string(order) +
                      " (supported: " + std::to_string(kMinOrder) + ".." +
                      std::to_string(kMaxOrder) + ")");
  }
  using detail::cld;
  const int n = order;

  // P(y) = sum_{k<N} C(N-1+k, k) y^k with y = sin^2(w/2).
  std::vector<long double> p(n);
  for (int k = 0; k < n; ++k) p[k] = detail::binomial(n - 1 + k, k);

  // Each y-root maps to a reciprocal pair of z-roots; keep the one inside the
  // unit circle for the minimum-phase factor.
  std::vector<cld> zeros;
  for (const cld& y : detail::poly_roots(p)) {
    const cld b = 1.0L - 2.0L * y;
    const cld s = std::sqrt(b * b - 1.0L);
    cld z = b + s;
    if (std::abs(z) > 1.0L) z = b - s;
    zeros.push_back(z);
  }

  // H(z) = (1 + z^-1)^N prod_k (1 - z_k z^-1), coefficients in powers of z^-1.
  std::vector<cld> h{1.0L};
  auto multiply = [&h](cld root) {
    std::vector<cld> out(h.size() + 1, 0.0L);
    for (std::size_t i = 0; i < h.size(); ++i) {
      out[i] += h[i];
      out[i + 1] -= root * h[i];
    }
    h = std::move(out);
  };
  for (int i = 0; i < n; ++i) multiply(-1.0L);
  for (const cld& z : zeros) multiply(z);

  long double sum = 0.0L;
  for (const cld& v : h) sum += v.real();
  const long double scale = std::sqrt(2.0L) / sum;

  WaveletFilterPair pair;
  pair.order = order;
  const std::size_t len = h.size();
  pair.scaling.resize(len);
  pair.mother.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    pair.scaling[i] = static_cast<double>(h[i].real() * scale);
  }
  for (std::size_t i = 0; i < len; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    pair.mother[i] = sign * pair.scaling[len - 1 - i];
  }
  return pair;
}

// Deepest level whose dilation still fits inside the signal (2^L <= n).
inline int max_levels(std::size_t length) {
  int levels = 0;
  while ((std::size_t{2} << levels) <= length) ++levels;
  return levels;
}

namespace detail {

// out[t] = sum_k taps[k] * in[(t - k*step) mod n]
inline void circular_conv(std::span<const double> in, std::span<const double> taps,
                          std::size_t step, std::span<double> out) {
  const std::size_t n = in.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const std::size_t shift = (k * step) % n;
    const double w = taps[k];
    for (std::size_t t = 0; t < shift; ++t) out[t] += w * in[t + n - shift];
    for (std::size_t t = shift; t < n; ++t) out[t] += w * in[t - shift];
  }
}

// out[t] += sum_k taps[k] * in[(t + k*step) mod n]
inline void circular_corr_add(std::span<const double> in, std::span<const double> taps,
                              std::size_t step, std::span<double> out) {
  const std::size_t n = in.size();
  for (std::size_t k = 0; k < taps.size(); ++k) {
    const std::size_t shift = (k * step) % n;
    const double w = taps[k];
    for (std::size_t t = 0; t + shift < n; ++t) out[t] += w * in[t + shift];
    for (std::size_t t = n - shift; t < n; ++t) out[t] += w * in[t + shift - n];
  }
}

}  // namespace detail

inline SubbandSet analyze(std::span<const double> signal, int levels,
                          const WaveletFilterPair& filters) {
  if (signal.empty()) throw DecompositionError("cannot decompose an empty signal");
  if (levels < 1) throw ConfigError("wavelet levels must be >= 1");
  const int feasible = max_levels(signal.size());
  if (levels > feasible) {
    throw DecompositionError("signal of length " + std::to_string(signal.size()) +
                             " is too short for " + std::to_string(levels) +
                             " levels; maximum feasible depth is " +
                             std::to_string(feasible));
  }
  const std::size_t n = signal.size();
  SubbandSet out;
  out.levels = levels;
  out.details.assign(levels, Signal(n));
  out.gains.assign(levels + 1, 1.0);

  Signal approx(signal.begin(), signal.end());
  Signal next(n);
  for (int l = 0; l < levels; ++l) {
    const std::size_t step = std::size_t{1} << l;
    detail::circular_conv(approx, filters.mother, step, out.details[l]);
    detail::circular_conv(approx, filters.scaling, step, next);
    approx.swap(next);
  }
  out.approximation = std::move(approx);
  return out;
}

namespace detail {

inline void check_structure(const SubbandSet& s) {
  if (s.levels < 1 || static_cast<int>(s.details.size()) != s.levels) {
    throw StructuralError("subband set declares " + std::to_string(s.levels) +
                          " levels but holds " + std::to_string(s.details.size()) +
                          " detail streams");
  }
  const std::size_t n = s.approximation.size();
  if (n == 0) throw StructuralError("subband set has empty streams");
  for (int l = 0; l < s.levels; ++l) {
    std::size_t expect = n;
    if (l == 0 && s.level1_decimated) expect = (n + 1) / 2;
    if (s.details[l].size() != expect) {
      throw StructuralError("detail stream " + std::to_string(l + 1) + " has length " +
                            std::to_string(s.details[l].size()) + ", expected " +
                            std::to_string(expect));
    }
  }
  if (s.level1_decimated && n % 2 != 0) {
    throw StructuralError("a decimated level-1 detail requires an even stream length");
  }
}

// Critically sampled level-1 inverse from even-phase coefficients.
inline Signal decimated_level1_inverse(std::span<const double> approx1_even_source,
                                       std::span<const double> detail1_even,
                                       const WaveletFilterPair& f) {
  const std::size_t n = approx1_even_source.size();
  Signal out(n, 0.0);
  const std::size_t len = f.scaling.size();
  for (std::size_t m = 0; m < n / 2; ++m) {
    const double a = approx1_even_source[2 * m];
    const double d = detail1_even[m];
    // x[t] += h[k] a[2m] where 2m = t + k (mod n)
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t t = (2 * m + n - (k % n)) % n;
      out[t] += f.scaling[k] * a + f.mother[k] * d;
    }
  }
  return out;
}

}  // namespace detail

inline Signal synthesize(const SubbandSet& subbands, const WaveletFilterPair& filters) {
  detail::check_structure(subbands);
  const std::size_t n = subbands.length();
  Signal approx = subbands.approximation;
  Signal prev(n);
  const int last = subbands.level1_decimated ? 1 : 0;
  for (int l = subbands.levels - 1; l >= last; --l) {
    const std::size_t step = std::size_t{1} << l;
    std::fill(prev.begin(), prev.end(), 0.0);
    detail::circular_corr_add(approx, filters.scaling, step, prev);
    detail::circular_corr_add(subbands.details[l], filters.mother, step, prev);
    for (double& v : prev) v *= 0.5;
    approx.swap(prev);
  }
  if (subbands.level1_decimated) {
    return detail::decimated_level1_inverse(approx, subbands.details[0], filters);
  }
  return approx;
}

// Keeps the even-indexed samples of a level-1 detail stream.
inline Signal downsample_level1(std::span<const double> detail) {
  Signal out;
  out.reserve((detail.size() + 1) / 2);
  for (std::size_t i = 0; i < detail.size(); i += 2) out.push_back(detail[i]);
  return out;
}

// Restores the full-rate level-1 detail from its even phase. The odd phase is
// not a function of the even phase alone, so the level-1 approximation is
// required: the signal is rebuilt by the critically sampled inverse and then
// re-analyzed with the high-pass filter.
inline Signal upsample_level1(std::span<const double> detail_even,
                              std::span<const double> approx_level1,
                              const WaveletFilterPair& filters) {
  const std::size_t n = approx_level1.size();
  if (n % 2 != 0 || detail_even.size() != n / 2) {
    throw StructuralError("upsample_level1 needs an even-length approximation and a "
                          "half-length detail");
  }
  Signal x = detail::decimated_level1_inverse(approx_level1, detail_even, filters);
  Signal out(n);
  detail::circular_conv(x, filters.mother, 1, out);
  return out;
}

}  // namespace sbtts::wavelet
