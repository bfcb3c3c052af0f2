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


#include "sbtts/checkpoint.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace sbtts {
namespace {

ckpt::Checkpoint make_checkpoint() {
  ckpt::Checkpoint c;
  c.spec.levels = 2;
  c.spec.wavelet_order = 2;
  c.spec.channels = 4;
  c.spec.cond_channels = 3;
  c.spec.dilations = {1, 2};
  c.spec.gains = {0.5, 0.25, 1.5};
  c.model = SubbandModel<double>::random(c.spec, 77);
  c.iteration = 1234;
  c.loss_digest = 0xfeedfacecafebeefULL;
  c.train_config = {{"lr0", 1e-3}};
  return c;
}

TEST(Checkpoint, RoundTripIsExact) {
  auto c = make_checkpoint();
  const std::string bytes = ckpt::serialize(c);
  auto back = ckpt::deserialize(bytes);
  EXPECT_EQ(back.iteration, 1234);
  EXPECT_EQ(back.loss_digest, 0xfeedfacecafebeefULL);
  EXPECT_EQ(back.spec.gains, c.spec.gains);
  EXPECT_EQ(back.spec.dilations, c.spec.dilations);
  EXPECT_EQ(back.spec.inventory, c.spec.inventory);
  EXPECT_EQ(back.train_config, c.train_config);
  EXPECT_EQ(ckpt::serialize(back), bytes);
}

TEST(Checkpoint, EveryTensorNamedOnce) {
  auto c = make_checkpoint();
  const std::string bytes = ckpt::serialize(c);
  const auto len = ckpt::detail::get_u64(reinterpret_cast<const unsigned char*>(bytes.data()) + 8);
  const auto header = nlohmann::json::parse(bytes.substr(16, len));
  std::set<std::string> names;
  for (const auto& t : header.at("tensors")) {
    EXPECT_TRUE(names.insert(t.at("name").get<std::string>()).second);
  }
  std::size_t count = 0;
  c.model.for_each([&](const std::string& name, nn::Mat<double>&) {
    ++count;
    EXPECT_TRUE(names.count(name)) << name;
  });
  EXPECT_EQ(names.size(), count);
}

TEST(Checkpoint, DetectsCorruption) {
  auto c = make_checkpoint();
  const std::string bytes = ckpt::serialize(c);
  std::string flipped = bytes;
  flipped[bytes.size() - 3] ^= 0x10;
  EXPECT_THROW(ckpt::deserialize(flipped), IoError);
  EXPECT_THROW(ckpt::deserialize(bytes.substr(0, bytes.size() - 8)), IoError);
  EXPECT_THROW(ckpt::deserialize(bytes + "x"), IoError);
  std::string magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(ckpt::deserialize(magic), IoError);
  EXPECT_THROW(ckpt::deserialize(bytes.substr(0, 40)), IoError);
}

TEST(Checkpoint, DetectsInventoryMismatch) {
  auto c = make_checkpoint();
  std::string bytes = ckpt::serialize(c);
  const std::string needle = "\"AA0\"";
  const auto pos = bytes.find(needle);
  ASSERT_NE(pos, std::string::npos);
  bytes.replace(pos, needle.size(), "\"ZZ0\"");
  EXPECT_THROW(ckpt::deserialize(bytes), IoError);
}

TEST(Checkpoint, SaveAndLoad) {
  const auto dir = std::filesystem::temp_directory_path() / "sbtts_ckpt_test";
  std::filesystem::create_directories(dir);
  auto c = make_checkpoint();
  ckpt::save(dir / "m.ckpt", c);
  EXPECT_FALSE(std::filesystem::exists(dir / "m.ckpt.tmp"));
  auto back = ckpt::load(dir / "m.ckpt");
  EXPECT_EQ(ckpt::serialize(back), ckpt::serialize(c));
  EXPECT_THROW(ckpt::load(dir / "missing.ckpt"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace sbtts
