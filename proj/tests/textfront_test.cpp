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

#include "sbtts/textfront.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sbtts/errors.hpp"

namespace sbtts::text {
namespace {

const std::string kDataDir = SBTTS_TEST_DATA_DIR;

// Digit-by-digit spelling oracle for 0..9999, built from place names.
std::string spell(int n) {
  static const char* ones[] = {"",      "one",     "two",       "three",    "four",
                               "five",  "six",     "seven",     "eight",    "nine",
                               "ten",   "eleven",  "twelve",    "thirteen", "fourteen",
                               "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
  static const char* tens[] = {"", "", "twenty", "thirty", "forty",
                               "fifty", "sixty", "seventy", "eighty", "ninety"};
  if (n == 0) return "zero";
  std::vector<std::string> parts;
  if (n / 1000) parts.push_back(std::string(ones[n / 1000]) + " thousand");
  if (n / 100 % 10) parts.push_back(std::string(ones[n / 100 % 10]) + " hundred");
  const int rest = n % 100;
  if (rest >= 20) {
    parts.push_back(tens[rest / 10]);
    if (rest % 10) parts.push_back(ones[rest % 10]);
  } else if (rest > 0) {
    parts.push_back(ones[rest]);
  }
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : " ") + p;
  return out;
}

PronunciationDictionary mini_dict() {
  return PronunciationDictionary::load(kDataDir + "/cmudict_mini.txt");
}

TEST(Inventory, SeventyUniqueSymbolsSilenceFirst) {
  const auto inv = PhonemeInventory::standard();
  EXPECT_EQ(inv.size(), 70u);
  EXPECT_EQ(inv.symbol(0), "SIL");
  const std::set<std::string> unique(inv.symbols().begin(), inv.symbols().end());
  EXPECT_EQ(unique.size(), 70u);
  EXPECT_EQ(inv.index_of("sil"), kSilence);
  EXPECT_EQ(inv.index_of("pau"), kSilence);
  EXPECT_EQ(inv.index_of("ah0"), inv.index_of("AH0"));
  EXPECT_NE(inv.index_of("AH0"), inv.index_of("AH1"));
  EXPECT_THROW(inv.index_of("XX9"), FrontEndError);
  EXPECT_THROW(PhonemeInventory(std::vector<std::string>{"SIL", "AA"}), ConfigError);
}

TEST(NormalizeText, Rules) {
  EXPECT_EQ(normalize_text("Hello, World!"), "hello world");
  EXPECT_EQ(normalize_text("Chapter 25"), "chapter twenty five");
  EXPECT_EQ(normalize_text(""), "");
  EXPECT_EQ(normalize_text("  Don't   STOP  "), "don't stop");
}

TEST(NormalizeText, NumbersMatchSpellingOracle) {
  for (int n = 0; n <= 9999; ++n) ASSERT_EQ(number_to_words(n), spell(n)) << n;
}

TEST(NormalizeText, Idempotent) {
  std::mt19937_64 rng(12);
  const std::string alphabet = "abcXYZ 0123456789,.!?'-\t\n#";
  for (int i = 0; i < 500; ++i) {
    std::string s;
    const int len = static_cast<int>(rng() % 40);
    for (int j = 0; j < len; ++j) s += alphabet[rng() % alphabet.size()];
    const auto once = normalize_text(s);
    EXPECT_EQ(normalize_text(once), once) << s;
  }
}

TEST(Dictionary, HelloUsesFirstVariant) {
  const auto dict = mini_dict();
  const auto inv = PhonemeInventory::standard();
  const std::vector<int> expect{inv.index_of("HH"), inv.index_of("AH0"), inv.index_of("L"),
                                inv.index_of("OW1")};
  EXPECT_EQ(lookup("hello", dict, inv), expect);
  EXPECT_EQ(lookup("HELLO", dict, inv), expect);
}

TEST(Dictionary, PunctuationStrippedWordMatchesCleanForm) {
  const auto dict = mini_dict();
  const auto inv = PhonemeInventory::standard();
  EXPECT_EQ(lookup(normalize_text("Hello!!"), dict, inv), lookup("hello", dict, inv));
}

TEST(Dictionary, OutOfVocabularyNamesTheWord) {
  const auto dict = mini_dict();
  try {
    lookup("zzzzqx", dict, PhonemeInventory::standard());
    FAIL() << "expected FrontEndError";
  } catch (const FrontEndError& e) {
    EXPECT_NE(std::string(e.what()).find("zzzzqx"), std::string::npos);
  }
}

TEST(Dictionary, TextToPhonemesWrapsInSilence) {
  const auto dict = mini_dict();
  const auto inv = PhonemeInventory::standard();
  const auto seq = text_to_phonemes("Chapter 25.", dict, inv);
  ASSERT_GE(seq.size(), 3u);
  EXPECT_EQ(seq.front(), kSilence);
  EXPECT_EQ(seq.back(), kSilence);
  EXPECT_EQ(seq[1], inv.index_of("CH"));
  EXPECT_EQ(seq.size(), 2u + 5u + 6u + 3u);
}

TEST(Alignment, SingleIntervalTsv) {
  std::istringstream in("0\t1600\tAA1\n");
  const auto inv = PhonemeInventory::standard();
  const auto track = alignment_from_stream(in, 80, inv, AlignmentFormat::kTsv);
  ASSERT_EQ(track.size(), 20u);
  for (int f : track.frames) EXPECT_EQ(f, inv.index_of("AA1"));
}

TEST(Alignment, HtkUnitsAreHundredNanoseconds) {
  std::istringstream in("0 10000000 sil\n");
  const auto track = alignment_from_stream(in, 80, PhonemeInventory::standard(),
                                           AlignmentFormat::kHtk);
  EXPECT_EQ(track.size(), 200u);
  for (int f : track.frames) EXPECT_EQ(f, kSilence);
}

TEST(Alignment, EmptyFileIsAllSilence) {
  std::istringstream in("");
  const auto track = alignment_from_stream(in, 80, PhonemeInventory::standard(),
                                           AlignmentFormat::kTsv, 1000);
  EXPECT_EQ(track.size(), 13u);
  for (int f : track.frames) EXPECT_EQ(f, kSilence);
}

TEST(Alignment, GapsAreSilenceAndMidpointsDecide) {
  std::istringstream in("0 120 AA1\n200 400 B\n");
  const auto inv = PhonemeInventory::standard();
  const auto track = alignment_from_stream(in, 80, inv, AlignmentFormat::kTsv);
  ASSERT_EQ(track.size(), 5u);
  EXPECT_EQ(track.frames[0], inv.index_of("AA1"));  // midpoint 40
  EXPECT_EQ(track.frames[1], kSilence);              // midpoint 120, interval ends there
  EXPECT_EQ(track.frames[2], inv.index_of("B"));     // midpoint 200
  EXPECT_EQ(track.frames[4], inv.index_of("B"));
}

TEST(Alignment, OverlapReportsLine) {
  std::istringstream in("0 100 AA1\n# comment\n50 200 B\n");
  try {
    alignment_from_stream(in, 80, PhonemeInventory::standard(), AlignmentFormat::kTsv);
    FAIL() << "expected IngestionError";
  } catch (const IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Alignment, UnknownSymbolIsIngestionError) {
  std::istringstream in("0 100 QQ7\n");
  EXPECT_THROW(alignment_from_stream(in, 80, PhonemeInventory::standard(), AlignmentFormat::kTsv),
               IngestionError);
}

TEST(Alignment, CoversEveryFrameExactlyOnce) {
  std::mt19937_64 rng(2);
  const auto inv = PhonemeInventory::standard();
  for (int trial = 0; trial < 50; ++trial) {
    std::ostringstream file;
    std::int64_t t = 0;
    const int count = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < count; ++i) {
      const std::int64_t len = 1 + static_cast<std::int64_t>(rng() % 700);
      file << t << ' ' << t + len << ' ' << inv.symbol(static_cast<int>(rng() % 70)) << '\n';
      t += len + static_cast<std::int64_t>(rng() % 3) * 40;
    }
    std::istringstream in(file.str());
    const auto track = alignment_from_stream(in, 80, inv, AlignmentFormat::kTsv,
                                             static_cast<std::size_t>(t));
    EXPECT_EQ(track.size(), frames_for(static_cast<std::size_t>(t), 80));
    EXPECT_GE(track.size() * 80, static_cast<std::size_t>(t));
    EXPECT_LT(track.size() * 80, static_cast<std::size_t>(t) + 80);
  }
}

TEST(Alignment, FuzzEitherParsesOrErrors) {
  std::mt19937_64 rng(77);
  const auto inv = PhonemeInventory::standard();
  const std::vector<std::string> tokens{"0", "10", "160", "-5", "x", "AA1", "sil", "B",
                                        "ZZ", "\t", " ", "\n", "99999", "1e3", "#"};
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const int len = static_cast<int>(rng() % 20);
    for (int j = 0; j < len; ++j) s += tokens[rng() % tokens.size()] + (rng() % 2 ? " " : "");
    std::istringstream in(s);
    try {
      const auto track = alignment_from_stream(in, 80, inv, AlignmentFormat::kTsv);
      for (int f : track.frames) ASSERT_TRUE(f >= 0 && f < 70);
    } catch (const IngestionError&) {
    }
  }
}

TEST(UniformAlign, RemainderGoesToTheFront) {
  const auto runs = [](std::vector<int> ph, std::size_t frames) {
    const auto t = uniform_align(ph, frames);
    std::vector<int> lengths;
    for (std::size_t i = 0; i < t.frames.size(); ++i) {
      if (i == 0 || t.frames[i] != t.frames[i - 1]) lengths.push_back(0);
      ++lengths.back();
    }
    return lengths;
  };
  EXPECT_EQ(runs({1, 2}, 10), (std::vector<int>{5, 5}));
  EXPECT_EQ(runs({1, 2, 3}, 10), (std::vector<int>{4, 3, 3}));
  EXPECT_EQ(runs({4}, 7), (std::vector<int>{7}));
  EXPECT_THROW(uniform_align({}, 5), FrontEndError);
}

}  // namespace
}  // namespace sbtts::text
