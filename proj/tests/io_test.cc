// Copyright 2026 The HRNet Authors.
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

#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <string>

#include "gtest/gtest.h"
#include "hrnet/key_value.h"
#include "hrnet/preprocess.h"
#include "hrnet/rng.h"
#include "hrnet/trajectory.h"

namespace hrnet {
namespace {

Dataset Tiny() {
  Dataset d;
  d.grid = *geo::GridSpec::Create({35.6, 139.6, 35.8, 139.8}, 4);
  d.n_time = 3;
  d.trajectories = {{{0, 0}, {5, 1}, {0, 2}}, {{15, 2}}};
  return d;
}

TEST(TrajectoryTest, ValidatorInvariants) {
  EXPECT_TRUE(ValidateTrajectory({{0, 0}, {1, 0}, {0, 1}}, 16, 2).ok());
  EXPECT_FALSE(ValidateTrajectory({}, 16, 2).ok());
  EXPECT_FALSE(ValidateTrajectory({{3, 0}, {3, 1}}, 16, 2).ok());
  EXPECT_FALSE(ValidateTrajectory({{3, 1}, {4, 0}}, 16, 2).ok());
  EXPECT_FALSE(ValidateTrajectory({{16, 0}}, 16, 2).ok());
  EXPECT_FALSE(ValidateTrajectory({{-1, 0}}, 16, 2).ok());
  EXPECT_FALSE(ValidateTrajectory({{0, 2}}, 16, 2).ok());
  EXPECT_TRUE(ValidateDataset(Tiny()).ok());
  Dataset bad = Tiny();
  bad.n_time = 2;
  EXPECT_FALSE(ValidateDataset(bad).ok());
}

TEST(TrajectoryTest, FileRoundTripIsExact) {
  const Dataset d = Tiny();
  const std::string text = FormatDataset(d);
  EXPECT_EQ(text.rfind("# hrnet trajectory dataset v1", 0), 0u);
  EXPECT_NE(text.find("0:0 5:1 0:2\n15:2\n"), std::string::npos);
  EXPECT_EQ(*ParseDataset(text), d);
  const Dataset big = *preprocess::GenRandomDataset(16, 500, 3);
  EXPECT_EQ(*ParseDataset(FormatDataset(big)), big);

  const std::string path =
      (std::filesystem::temp_directory_path() / "hrnet_tiny_dataset.txt").string();
  ASSERT_TRUE(SaveDataset(d, path).ok());
  EXPECT_EQ(*LoadDataset(path), d);
  std::filesystem::remove(path);
  EXPECT_FALSE(LoadDataset(path).ok());
}

TEST(TrajectoryTest, ParseRejectsMalformedFiles) {
  const std::string good = FormatDataset(Tiny());
  EXPECT_FALSE(ParseDataset("hello\n").ok());
  std::string wrong_count = good;
  wrong_count.replace(wrong_count.find("count=2"), 7, "count=3");
  EXPECT_FALSE(ParseDataset(wrong_count).ok());
  std::string bad_visit = good;
  bad_visit.replace(bad_visit.find("5:1"), 3, "5-1");
  EXPECT_FALSE(ParseDataset(bad_visit).ok());
  std::string repeat = good;
  repeat.replace(repeat.find("5:1"), 3, "0:1");
  EXPECT_FALSE(ParseDataset(repeat).ok());
}

TEST(KeyValueTest, DoublesRoundTripExactly) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -0.0, 2.0,
                   std::numeric_limits<double>::infinity()}) {
    EXPECT_EQ(*ParseDouble(FormatDouble(x)), x) << FormatDouble(x);
  }
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_FALSE(ParseDouble("1.5x").ok());
  EXPECT_EQ(*ParseInt("-42"), -42);
  EXPECT_FALSE(ParseInt("4.2").ok());
}

TEST(KeyValueTest, BlockFormatAndParse) {
  KeyValueBlock kv;
  kv.Set("name", "straight");
  kv.SetDouble("epsilon", 1.898);
  kv.SetInt("w", 16);
  kv.SetInt("w", 32);
  const std::string text = kv.Format();
  EXPECT_EQ(text, "name=straight\nepsilon=1.898\nw=32\n");
  const KeyValueBlock back = *KeyValueBlock::Parse("# comment\n\n" + text);
  EXPECT_EQ(*back.Get("name"), "straight");
  EXPECT_EQ(*back.GetDouble("epsilon"), 1.898);
  EXPECT_EQ(*back.GetInt("w"), 32);
  EXPECT_FALSE(back.Has("missing"));
  EXPECT_FALSE(back.Get("missing").ok());
  EXPECT_FALSE(KeyValueBlock::Parse("novalue\n").ok());
}

TEST(RngTest, ReproducibleAndSplittable) {
  Rng a(7), b(7), c(8);
  for (int i = 0; i < 100; ++i) {
    const uint64_t x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
  EXPECT_EQ(a.counter(), 100u);
  EXPECT_EQ(DeriveSeed(1, "dpsgd"), DeriveSeed(1, "dpsgd"));
  EXPECT_NE(DeriveSeed(1, "dpsgd"), DeriveSeed(1, "generate"));
  EXPECT_NE(DeriveSeed(1, "dpsgd"), DeriveSeed(2, "dpsgd"));
  std::set<uint64_t> items;
  for (uint64_t i = 0; i < 1000; ++i) items.insert(DeriveSeed(3, i));
  EXPECT_EQ(items.size(), 1000u);
}

TEST(RngTest, UniformMoments) {
  Rng rng(11);
  constexpr int kN = 200000;
  double sum = 0.0, sq = 0.0, lo = 1.0, hi = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double u = rng.Uniform();
    const double v = rng.UniformOpen();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    sum += u;
    sq += u * u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  // Mean 1/2 (sd 1/sqrt(12 N)) and variance 1/12.
  EXPECT_NEAR(sum / kN, 0.5, 5 / std::sqrt(12.0 * kN));
  EXPECT_NEAR(sq / kN - (sum / kN) * (sum / kN), 1.0 / 12, 2e-3);
  EXPECT_LT(lo, 1e-4);
  EXPECT_GT(hi, 1 - 1e-4);
}

}  // namespace
}  // namespace hrnet
