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

// Objective speech metrics: energy-ratio SNR, log-spectral distortion on the
// linear STFT and on a 40-band Mel spectrogram, with mean +- 95% CI
// aggregation over an utterance set.
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"

namespace sbtts::metrics {

inline constexpr double kMagnitudeFloor = 1e-10;
inline constexpr double kSnrCapDb = 120.0;

struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  std::vector<double> magnitudes;  // row-major frames x bins

  double at(std::size_t frame, std::size_t bin) const { return magnitudes[frame * bins + bin]; }
  std::span<const double> row(std::size_t frame) const {
    return {magnitudes.data() + frame * bins, bins};
  }
};

struct StftSpec {
  double frame_ms = 16.0;
  double hop_ms = 1.0;
  double sample_rate = 16000.0;

  std::size_t frame_len() const {
    return static_cast<std::size_t>(std::lround(frame_ms * sample_rate / 1000.0));
  }
  std::size_t hop() const {
    return static_cast<std::size_t>(std::lround(hop_ms * sample_rate / 1000.0));
  }
};

// Linear-spectrogram settings for SD and the Mel settings for MSD.
inline StftSpec sd_stft(double sample_rate = 16000.0) { return {16.0, 1.0, sample_rate}; }
inline StftSpec msd_stft(double sample_rate = 16000.0) { return {25.0, 5.0, sample_rate}; }
inline constexpr std::size_t kMelBands = 40;

// Periodic Hann.
inline std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
  }
  return w;
}

namespace detail {

// FFTW plans are created under a lock and executed through the new-array
// interface, which is thread safe.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
    fftw_free(in);
    fftw_free(out);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  // |X[k]| for k = 0..n/2
  void magnitudes(std::span<double> in, std::span<double> out,
                  std::vector<std::complex<double>>& scratch) const {
    scratch.resize(n_ / 2 + 1);
    fftw_execute_dft_r2c(plan_, in.data(), reinterpret_cast<fftw_complex*>(scratch.data()));
    for (std::size_t k = 0; k < n_ / 2 + 1; ++k) out[k] = std::abs(scratch[k]);
  }

  static std::shared_ptr<const RealFft> get(std::size_t n) {
    static std::mutex cache_mutex;
    static std::map<std::size_t, std::shared_ptr<const RealFft>> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_shared<const RealFft>(n);
    return slot;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  std::size_t n_;
  fftw_plan plan_;
};

}  // namespace detail

// Non-centered frames starting at n*hop; a trailing partial frame is dropped.
inline Spectrogram stft_magnitude(std::span<const double> signal, const StftSpec& spec) {
  Spectrogram s;
  s.frame_len = spec.frame_len();
  s.hop = spec.hop();
  if (s.frame_len < 2 || s.hop < 1) throw ConfigError("STFT frame/hop too small");
  s.bins = s.frame_len / 2 + 1;
  s.frames = signal.size() < s.frame_len ? 0 : (signal.size() - s.frame_len) / s.hop + 1;
  s.magnitudes.assign(s.frames * s.bins, 0.0);
  const auto window = hann(s.frame_len);
  auto fft = detail::RealFft::get(s.frame_len);
  std::vector<double> buf(s.frame_len);
  std::vector<std::complex<double>> scratch;
  for (std::size_t f = 0; f < s.frames; ++f) {
    const double* src = signal.data() + f * s.hop;
    for (std::size_t i = 0; i < s.frame_len; ++i) buf[i] = src[i] * window[i];
    fft->magnitudes(buf, {s.magnitudes.data() + f * s.bins, s.bins}, scratch);
  }
  return s;
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters equally spaced on the Mel axis from 0 Hz to Nyquist,
// unit peak, evaluated at the exact bin frequencies.
struct MelFilterbank {
  std::size_t bands = 0;
  std::size_t bins = 0;
  std::vector<double> weights;  // row-major bands x bins

  double at(std::size_t band, std::size_t bin) const { return weights[band * bins + bin]; }

  static MelFilterbank make(std::size_t bands, std::size_t frame_len, double sample_rate) {
    MelFilterbank fb;
    fb.bands = bands;
    fb.bins = frame_len / 2 + 1;
    fb.weights.assign(bands * fb.bins, 0.0);
    const double top = hz_to_mel(sample_rate / 2.0);
    std::vector<double> edges(bands + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
      edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(bands + 1));
    }
    for (std::size_t m = 0; m < bands; ++m) {
      const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
      for (std::size_t k = 0; k < fb.bins; ++k) {
        const double f = static_cast<double>(k) * sample_rate / static_cast<double>(frame_len);
        double w = 0.0;
        if (f > lo && f <= mid) {
          w = (f - lo) / (mid - lo);
        } else if (f > mid && f < hi) {
          w = (hi - f) / (hi - mid);
        }
        fb.weights[m * fb.bins + k] = w;
      }
    }
    return fb;
  }

  Spectrogram apply(const Spectrogram& s) const {
    if (s.bins != bins) throw StructuralError("Mel filterbank / spectrogram bin mismatch");
    Spectrogram out;
    out.frames = s.frames;
    out.bins = bands;
    out.frame_len = s.frame_len;
    out.hop = s.hop;
    out.magnitudes.assign(out.frames * bands, 0.0);
    for (std::size_t f = 0; f < s.frames; ++f) {
      for (std::size_t m = 0; m < bands; ++m) {
        double acc = 0.0;
        for (std::size_t k = 0; k < bins; ++k) acc += weights[m * bins + k] * s.at(f, k);
        out.magnitudes[f * bands + m] = acc;
      }
    }
    return out;
  }
};

inline Spectrogram mel_spectrogram(std::span<const double> signal, double sample_rate = 16000.0,
                                   std::size_t bands = kMelBands) {
  const StftSpec spec = msd_stft(sample_rate);
  const auto fb = MelFilterbank::make(bands, spec.frame_len(), sample_rate);
  return fb.apply(stft_magnitude(signal, spec));
}

namespace detail {

inline void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw StructuralError("target/estimate length mismatch: " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
  }
}

// A vanishing denominator reports kSnrCapDb; anything else is uncapped.
inline double capped_db(double num, double den) {
  if (den < 1e-300) return kSnrCapDb;
  if (num < 1e-300) return -kSnrCapDb;
  return 10.0 * std::log10(num / den);
}

}  // namespace detail

struct SnrPair {
  double energy_ratio_db;  // 10 log10(sum s^2 / |sum s^2 - sum s_hat^2|)
  double conventional_db;  // 10 log10(sum s^2 / sum (s - s_hat)^2)
};

inline SnrPair snr_db(std::span<const double> target, std::span<const double> estimate) {
  detail::check_lengths(target, estimate);
  double es = 0.0, ee = 0.0, err = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    es += target[i] * target[i];
    ee += estimate[i] * estimate[i];
    const double d = target[i] - estimate[i];
    err += d * d;
  }
  return {detail::capped_db(es, std::abs(es - ee)), detail::capped_db(es, err)};
}

// Frame-averaged RMS of the dB magnitude ratio.
inline double spectral_distortion(const Spectrogram& target, const Spectrogram& estimate) {
  if (target.frames != estimate.frames || target.bins != estimate.bins) {
    throw StructuralError("spectrogram shape mismatch");
  }
  if (target.frames == 0) throw StructuralError("signal shorter than one analysis frame");
  double total = 0.0;
  for (std::size_t f = 0; f < target.frames; ++f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < target.bins; ++k) {
      const double a = std::max(target.at(f, k), kMagnitudeFloor);
      const double b = std::max(estimate.at(f, k), kMagnitudeFloor);
      const double r = 20.0 * std::log10(a / b);
      acc += r * r;
    }
    total += std::sqrt(acc / static_cast<double>(target.bins));
  }
  return total / static_cast<double>(target.frames);
}

inline double sd_db(std::span<const double> target, std::span<const double> estimate,
                    double sample_rate = 16000.0) {
  detail::check_lengths(target, estimate);
  const StftSpec spec = sd_stft(sample_rate);
  return spectral_distortion(stft_magnitude(target, spec), stft_magnitude(estimate, spec));
}

inline double msd_db(std::span<const double> target, std::span<const double> estimate,
                     double sample_rate = 16000.0) {
  detail::check_lengths(target, estimate);
  return spectral_distortion(mel_spectrogram(target, sample_rate),
                             mel_spectrogram(estimate, sample_rate));
}

struct UtteranceMetrics {
  std::string id;
  double snr_energy = 0.0;
  double snr_conv = 0.0;
  double sd = 0.0;
  double msd = 0.0;
};

struct Summary {
  double mean = 0.0;
  double ci95 = 0.0;  // 1.96 * sample sd / sqrt(n); 0 when n == 1
};

inline Summary summarize(std::span<const double> values) {
  if (values.empty()) throw StructuralError("cannot summarize an empty set");
  Summary s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  if (values.size() > 1) {
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    var /= n - 1.0;
    s.ci95 = 1.96 * std::sqrt(var) / std::sqrt(n);
  }
  return s;
}

struct MetricReport {
  std::vector<UtteranceMetrics> utterances;
  Summary snr_energy, snr_conv, sd, msd;
  bool degenerate = false;  // n == 1, CI reported as 0
};

inline UtteranceMetrics evaluate_pair(std::string id, std::span<const double> target,
                                      std::span<const double> estimate,
                                      double sample_rate = 16000.0) {
  UtteranceMetrics m;
  m.id = std::move(id);
  const SnrPair snr = snr_db(target, estimate);
  m.snr_energy = snr.energy_ratio_db;
  m.snr_conv = snr.conventional_db;
  m.sd = sd_db(target, estimate, sample_rate);
  m.msd = msd_db(target, estimate, sample_rate);
  return m;
}

inline MetricReport aggregate(std::vector<UtteranceMetrics> per_utterance) {
  if (per_utterance.empty()) throw StructuralError("evaluation set is empty");
  MetricReport r;
  r.utterances = std::move(per_utterance);
  r.degenerate = r.utterances.size() == 1;
  auto column = [&](double UtteranceMetrics::*field) {
    std::vector<double> v;
    for (const auto& u : r.utterances) v.push_back(u.*field);
    return summarize(v);
  };
  r.snr_energy = column(&UtteranceMetrics::snr_energy);
  r.snr_conv = column(&UtteranceMetrics::snr_conv);
  r.sd = column(&UtteranceMetrics::sd);
  r.msd = column(&UtteranceMetrics::msd);
  return r;
}

struct SignalPair {
  std::string id;
  std::span<const double> target;
  std::span<const double> estimate;
};

inline MetricReport evaluate_set(std::span<const SignalPair> pairs, double sample_rate = 16000.0) {
  if (pairs.empty()) throw StructuralError("evaluation set is empty");
  std::vector<UtteranceMetrics> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) rows.push_back(evaluate_pair(p.id, p.target, p.estimate, sample_rate));
  return aggregate(std::move(rows));
}

}  // namespace sbtts::metrics
