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

// RIFF/WAVE reading and writing (PCM16 and IEEE float32) and energy-based
// trimming of leading and trailing silence.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"
#include "sbtts/parallel.hpp"

namespace sbtts::audio {

enum class SampleFormat { kPcm16, kFloat32 };

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
};

// Interleaved frames, used for multi-channel subband dumps.
struct MultiChannel {
  std::vector<std::vector<double>> channels;
  int sample_rate = 16000;
};

namespace detail {

inline std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

inline std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

inline void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

inline void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Parsed {
  SampleFormat format = SampleFormat::kPcm16;
  int channels = 0;
  int sample_rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_bytes = 0;
};

inline Parsed parse(const std::string& bytes, const std::string& where) {
  const auto fail = [&](const std::string& why) { return IoError(where + ": " + why); };
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }
  Parsed out;
  bool have_fmt = false;
  int bits = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = le32(p + pos + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size()) throw fail("malformed fmt chunk");
      std::uint16_t tag = le16(p + body);
      out.channels = le16(p + body + 2);
      out.sample_rate = static_cast<int>(le32(p + body + 4));
      bits = le16(p + body + 14);
      if (tag == 0xFFFE) {
        if (size < 40) throw fail("malformed extensible fmt chunk");
        tag = le16(p + body + 24);
      }
      if (tag == 1 && bits == 16) {
        out.format = SampleFormat::kPcm16;
      } else if (tag == 3 && bits == 32) {
        out.format = SampleFormat::kFloat32;
      } else {
        throw fail("unsupported codec (format tag " + std::to_string(tag) + ", " +
                   std::to_string(bits) + " bits); need PCM16 or float32");
      }
      have_fmt = true;
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      out.data = p + body;
      out.data_bytes = std::min<std::size_t>(size, bytes.size() - body);
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw fail("missing fmt chunk");
  if (!out.data) throw fail("missing data chunk");
  if (out.channels < 1) throw fail("zero channels");
  if (out.sample_rate < 1) throw fail("invalid sample rate");
  const std::size_t frame = static_cast<std::size_t>(out.channels) * (bits / 8);
  out.data_bytes -= out.data_bytes % frame;
  return out;
}

inline double sample_at(const Parsed& w, std::size_t index) {
  if (w.format == SampleFormat::kPcm16) {
    return static_cast<std::int16_t>(le16(w.data + 2 * index)) / 32768.0;
  }
  return static_cast<double>(std::bit_cast<float>(le32(w.data + 4 * index)));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::int16_t to_pcm16(double v) {
  const double s = std::nearbyint(v * 32768.0);
  return static_cast<std::int16_t>(std::clamp(s, -32768.0, 32767.0));
}

inline std::string encode(const std::vector<std::span<const double>>& channels, int sample_rate,
                          SampleFormat format) {
  const std::size_t n = channels.empty() ? 0 : channels.front().size();
  for (const auto& c : channels) {
    if (c.size() != n) throw StructuralError("channels differ in length");
  }
  const std::uint16_t nch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bits = format == SampleFormat::kPcm16 ? 16 : 32;
  const std::uint32_t block = nch * bits / 8;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(n * block);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, format == SampleFormat::kPcm16 ? 1 : 3);
  put16(out, nch);
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate) * block);
  put16(out, static_cast<std::uint16_t>(block));
  put16(out, bits);
  out += "data";
  put32(out, data_bytes);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& c : channels) {
      if (format == SampleFormat::kPcm16) {
        put16(out, static_cast<std::uint16_t>(to_pcm16(c[i])));
      } else {
        put32(out, std::bit_cast<std::uint32_t>(static_cast<float>(c[i])));
      }
    }
  }
  return out;
}

}  // namespace detail

inline Waveform parse_wav(const std::string& bytes, const std::string& where = "wav") {
  const detail::Parsed w = detail::parse(bytes, where);
  if (w.channels != 1) {
    throw IoError(where + ": expected mono audio, found " + std::to_string(w.channels) +
                  " channels");
  }
  Waveform out;
  out.sample_rate = w.sample_rate;
  const std::size_t width = w.format == SampleFormat::kPcm16 ? 2 : 4;
  out.samples.resize(w.data_bytes / width);
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] = detail::sample_at(w, i);
  return out;
}

inline Waveform read_wav(const std::filesystem::path& path) {
  Waveform w = parse_wav(detail::read_file(path), path.string());
  if (w.sample_rate != 16000) {
    warn(path.string() + ": sample rate " + std::to_string(w.sample_rate) +
         " Hz, only 16000 Hz is tested");
  }
  return w;
}

inline MultiChannel read_wav_multichannel(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  const detail::Parsed w = detail::parse(bytes, path.string());
  MultiChannel out;
  out.sample_rate = w.sample_rate;
  const std::size_t width = w.format == SampleFormat::kPcm16 ? 2 : 4;
  const std::size_t frames = w.data_bytes / (width * w.channels);
  out.channels.assign(static_cast<std::size_t>(w.channels), std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < w.channels; ++c) {
      out.channels[c][i] = detail::sample_at(w, i * w.channels + c);
    }
  }
  return out;
}

inline std::string encode_wav(std::span<const double> samples, int sample_rate,
                              SampleFormat format = SampleFormat::kPcm16) {
  return detail::encode({samples}, sample_rate, format);
}

inline void write_wav(const std::filesystem::path& path, std::span<const double> samples,
                      int sample_rate, SampleFormat format = SampleFormat::kPcm16) {
  detail::write_file(path, encode_wav(samples, sample_rate, format));
}

inline void write_wav(const std::filesystem::path& path, const Waveform& w,
                      SampleFormat format = SampleFormat::kPcm16) {
  write_wav(path, w.samples, w.sample_rate, format);
}

inline void write_wav_multichannel(const std::filesystem::path& path,
                                   const std::vector<std::vector<double>>& channels,
                                   int sample_rate, SampleFormat format = SampleFormat::kFloat32) {
  std::vector<std::span<const double>> views(channels.begin(), channels.end());
  detail::write_file(path, detail::encode(views, sample_rate, format));
}

// Drops leading and trailing frames whose energy is more than threshold_db
// below the loudest frame. The tail frame may be partial.
inline Waveform vad_trim(const Waveform& w, double threshold_db = 40.0, double frame_ms = 30.0) {
  if (!(threshold_db > 0) || !(frame_ms > 0)) throw ConfigError("invalid VAD parameters");
  const std::size_t frame =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(frame_ms * w.sample_rate / 1000.0)));
  const std::size_t n = w.samples.size();
  const std::size_t frames = (n + frame - 1) / frame;
  std::vector<double> energy(frames, 0.0);
  for (std::size_t i = 0; i < n; ++i) energy[i / frame] += w.samples[i] * w.samples[i];
  for (std::size_t f = 0; f < frames; ++f) {
    energy[f] /= static_cast<double>(std::min(frame, n - f * frame));
  }
  const double peak = frames ? *std::max_element(energy.begin(), energy.end()) : 0.0;
  Waveform out;
  out.sample_rate = w.sample_rate;
  if (peak <= 0.0) {
    warn("vad_trim: input is entirely silent");
    return out;
  }
  const double floor = peak * std::pow(10.0, -threshold_db / 10.0);
  std::size_t first = 0;
  while (energy[first] < floor) ++first;
  std::size_t last = frames - 1;
  while (energy[last] < floor) --last;
  const std::size_t begin = first * frame;
  const std::size_t end = std::min(n, (last + 1) * frame);
  out.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     w.samples.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

}  // namespace sbtts::audio
