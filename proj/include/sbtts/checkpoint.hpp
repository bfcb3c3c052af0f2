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

// Binary checkpoints: an 8-byte magic, a little-endian u64 header length, a
// JSON header and a float64 payload holding every tensor in declared order.
#pragma once

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"
#include "sbtts/model.hpp"
#include "sbtts/textfront.hpp"

namespace sbtts::ckpt {

inline constexpr char kMagic[8] = {'S', 'B', 'T', 'T', 'S', 'C', 'K', '1'};

struct Checkpoint {
  ModelSpec spec;
  nlohmann::json train_config = nlohmann::json::object();
  std::int64_t iteration = 0;
  std::uint64_t loss_digest = 0;
  SubbandModel<double> model;
};

namespace detail {

inline std::uint64_t fnv1a(const unsigned char* data, std::size_t n,
                           std::uint64_t h = 1469598103934665603ULL) {
  for (std::size_t i = 0; i < n; ++i) h = (h ^ data[i]) * 1099511628211ULL;
  return h;
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

inline std::uint64_t inventory_hash(const std::vector<std::string>& symbols) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& s : symbols) {
    h = fnv1a(reinterpret_cast<const unsigned char*>(s.data()), s.size(), h);
    const unsigned char sep = 0;
    h = fnv1a(&sep, 1, h);
  }
  return h;
}

}  // namespace detail

inline std::string serialize(Checkpoint& c) {
  std::string payload;
  nlohmann::json tensors = nlohmann::json::array();
  c.model.for_each([&](const std::string& name, nn::Mat<double>& m) {
    tensors.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()},
                       {"offset", payload.size()}});
    for (nn::Index i = 0; i < m.size(); ++i) {
      detail::put_u64(payload, std::bit_cast<std::uint64_t>(m.data()[i]));
    }
  });
  nlohmann::json header{
      {"format", 1},
      {"model", c.spec},
      {"train_config", c.train_config},
      {"iteration", c.iteration},
      {"inventory_hash", detail::inventory_hash(c.spec.inventory)},
      {"loss_digest", c.loss_digest},
      {"tensors", tensors},
      {"payload_bytes", payload.size()},
      {"payload_hash",
       detail::fnv1a(reinterpret_cast<const unsigned char*>(payload.data()), payload.size())}};
  const std::string text = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  detail::put_u64(out, text.size());
  out += text;
  out += payload;
  return out;
}

inline Checkpoint deserialize(const std::string& bytes, const std::string& where = "checkpoint") {
  const auto fail = [&](const std::string& why) -> IoError {
    return IoError(where + ": " + why);
  };
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw fail("bad magic, not a checkpoint");
  }
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t header_len = detail::get_u64(raw + 8);
  if (header_len > bytes.size() - 16) throw fail("truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("malformed header: ") + e.what());
  }
  const std::size_t base = 16 + header_len;
  const std::size_t payload_bytes = bytes.size() - base;

  Checkpoint c;
  try {
    c.spec = header.at("model").get<ModelSpec>();
    c.train_config = header.value("train_config", nlohmann::json::object());
    c.iteration = header.at("iteration").get<std::int64_t>();
    c.loss_digest = header.at("loss_digest").get<std::uint64_t>();
    if (header.at("payload_bytes").get<std::uint64_t>() != payload_bytes) {
      throw fail("payload size mismatch, file truncated or padded");
    }
    if (header.at("payload_hash").get<std::uint64_t>() !=
        detail::fnv1a(raw + base, payload_bytes)) {
      throw fail("payload hash mismatch, file corrupted");
    }
    if (header.at("inventory_hash").get<std::uint64_t>() !=
        detail::inventory_hash(c.spec.inventory)) {
      throw fail("phoneme inventory hash mismatch");
    }
    c.spec.validate();
    c.model = SubbandModel<double>::zeros(c.spec);
    const auto& tensors = header.at("tensors");
    std::size_t index = 0;
    c.model.for_each([&](const std::string& name, nn::Mat<double>& m) {
      if (index >= tensors.size()) throw fail("missing tensor " + name);
      const auto& t = tensors[index++];
      if (t.at("name").get<std::string>() != name) {
        throw fail("tensor order mismatch at " + name);
      }
      if (t.at("rows").get<nn::Index>() != m.rows() || t.at("cols").get<nn::Index>() != m.cols()) {
        throw fail("shape mismatch for tensor " + name);
      }
      const std::size_t off = t.at("offset").get<std::size_t>();
      if (off + 8 * static_cast<std::size_t>(m.size()) > payload_bytes) {
        throw fail("tensor " + name + " runs past the payload");
      }
      for (nn::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = std::bit_cast<double>(detail::get_u64(raw + base + off + 8 * i));
      }
    });
    if (index != tensors.size()) throw fail("unexpected extra tensors");
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("invalid header field: ") + e.what());
  } catch (const ConfigError& e) {
    throw fail(std::string("invalid model spec: ") + e.what());
  }
  return c;
}

inline void save(const std::filesystem::path& path, Checkpoint& c) {
  const std::string bytes = serialize(c);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline Checkpoint load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes, path.string());
}

}  // namespace sbtts::ckpt
