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

#include "hrnet/preprocess.h"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "hrnet/rng.h"

namespace hrnet::preprocess {
namespace {

constexpr double kEarthRadius = 6371008.8;
constexpr double kDegree = M_PI / 180.0;

// Offsets a point by (north, east) meters under the equirectangular model.
RawPoint Offset(double lat, double lng, double north, double east, double t) {
  return {lat + north / (kEarthRadius * kDegree),
          lng + east / (kEarthRadius * kDegree * std::cos(lat * kDegree)), t};
}

TEST(StayPointTest, StationaryTraceIsOneStay) {
  RawTrajectory raw{"a", {}};
  for (int i = 0; i < 20; ++i) raw.points.push_back({35.7, 139.7, 60.0 * i + 3.0});
  const std::vector<StayPoint> stays = ExtractStayPoints(raw);
  ASSERT_EQ(stays.size(), 1u);
  EXPECT_DOUBLE_EQ(stays[0].centroid.lat, 35.7);
  EXPECT_DOUBLE_EQ(stays[0].centroid.lng, 139.7);
  EXPECT_EQ(stays[0].arrival, 3.0);
  EXPECT_EQ(stays[0].departure, 60.0 * 19 + 3.0);
}

TEST(StayPointTest, ContinuousDriveHasNoStay) {
  RawTrajectory raw{"drive", {}};
  for (int i = 0; i < 120; ++i) raw.points.push_back(Offset(35.7, 139.7, 300.0 * i, 0, 30.0 * i));
  EXPECT_TRUE(ExtractStayPoints(raw).empty());
}

// Two 15-minute dwells 5 km apart joined by a 500 m/min drive.
RawTrajectory PlantedTrace(Rng& rng, double lat, double lng,
                           std::vector<std::pair<double, double>>& means) {
  RawTrajectory raw{"planted", {}};
  double t = 0.0;
  for (const double east : {0.0, 5000.0}) {
    double sum_lat = 0.0, sum_lng = 0.0;
    for (int i = 0; i < 16; ++i, t += 60.0) {
      const RawPoint p =
          Offset(lat, lng, 40.0 * (rng.Uniform() - 0.5), east + 40.0 * (rng.Uniform() - 0.5), t);
      sum_lat += p.lat;
      sum_lng += p.lng;
      raw.points.push_back(p);
    }
    means.push_back({sum_lat / 16, sum_lng / 16});
    if (east == 0.0) {
      for (int k = 1; k < 10; ++k, t += 60.0) {
        raw.points.push_back(Offset(lat, lng, 0.0, 500.0 * k, t));
      }
    }
  }
  return raw;
}

TEST(StayPointTest, PlantedClustersAreRecovered) {
  Rng rng(5);
  std::vector<std::pair<double, double>> means;
  const RawTrajectory raw = PlantedTrace(rng, 35.65, 139.65, means);
  const std::vector<StayPoint> stays = ExtractStayPoints(raw);
  ASSERT_EQ(stays.size(), 2u);
  for (int k = 0; k < 2; ++k) {
    const geo::LatLng planted{means[k].first, means[k].second};
    EXPECT_LT(geo::DistanceMeters(stays[k].centroid, planted), 1.0);
  }
  EXPECT_LT(stays[0].departure, stays[1].arrival);
  for (const StayPoint& s : stays) EXPECT_GE(s.departure - s.arrival, 600.0);
}

TEST(StayPointTest, TranslationShiftsCentroids) {
  Rng rng(8);
  std::vector<std::pair<double, double>> means;
  RawTrajectory raw = PlantedTrace(rng, 35.65, 139.65, means);
  const std::vector<StayPoint> base = ExtractStayPoints(raw);
  for (RawPoint& p : raw.points) p.lng += 0.03;
  const std::vector<StayPoint> moved = ExtractStayPoints(raw);
  ASSERT_EQ(base.size(), moved.size());
  for (size_t i = 0; i < base.size(); ++i) {
    EXPECT_NEAR(moved[i].centroid.lng, base[i].centroid.lng + 0.03, 1e-9);
    EXPECT_NEAR(moved[i].centroid.lat, base[i].centroid.lat, 1e-12);
    EXPECT_EQ(moved[i].arrival, base[i].arrival);
  }
}

// Unit box split in dyadic steps so cell arithmetic is exact.
const geo::GridSpec& UnitGrid() {
  static const geo::GridSpec* g = new geo::GridSpec(*geo::GridSpec::Create({0, 0, 1, 1}, 8));
  return *g;
}

StayPoint Stay(int row, int col, double arrival) {
  return {{(row + 0.5) / 8, (col + 0.5) / 8}, arrival, arrival + 600};
}

TEST(DiscretizeTest, CollapseRule) {
  const TimeHorizon day;
  auto t = Discretize({Stay(1, 1, 0), Stay(1, 1, 40000)}, UnitGrid(), 24, day);
  ASSERT_TRUE(t.ok());
  EXPECT_EQ(*t, (Trajectory{{9, 0}}));
  t = Discretize({Stay(0, 0, 0), Stay(0, 1, 3600), Stay(0, 0, 7200)}, UnitGrid(), 24, day);
  EXPECT_EQ(*t, (Trajectory{{0, 0}, {1, 1}, {0, 2}}));
  EXPECT_TRUE(absl::IsNotFound(Discretize({}, UnitGrid(), 24, day).status()));
  EXPECT_FALSE(Discretize({Stay(0, 0, 90000)}, UnitGrid(), 24, day).ok());
  EXPECT_FALSE(Discretize({{{2.0, 0.5}, 0, 1}}, UnitGrid(), 24, day).ok());
}

TEST(DiscretizeTest, MatchesStraightforwardReimplementation) {
  Rng rng(21);
  const TimeHorizon day;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<StayPoint> stays;
    double t = 0.0;
    const int n = 1 + trial % 12;
    for (int i = 0; i < n; ++i) {
      t += rng.Uniform() * 7000;
      // Few distinct cells so collapses happen.
      stays.push_back(Stay(static_cast<int>(rng.Uniform() * 2), static_cast<int>(rng.Uniform() * 2), t));
    }
    Trajectory expected;
    for (const StayPoint& s : stays) {
      const int cell = static_cast<int>(s.centroid.lat * 8) * 8 + static_cast<int>(s.centroid.lng * 8);
      const int slot = std::min(23, static_cast<int>(s.arrival / 3600));
      if (expected.empty() || expected.back().cell != cell) expected.push_back({cell, slot});
    }
    EXPECT_EQ(*Discretize(stays, UnitGrid(), 24, day), expected);
  }
}

TEST(TimeSlotTest, EvenDivisionWithEndFolded) {
  const TimeHorizon day;
  EXPECT_EQ(TimeSlot(0, day, 24), 0);
  EXPECT_EQ(TimeSlot(3599.9, day, 24), 0);
  EXPECT_EQ(TimeSlot(3600, day, 24), 1);
  EXPECT_EQ(TimeSlot(86400, day, 24), 23);
}

TEST(RawCsvTest, GroupsSortsAndDeduplicates) {
  const auto raw = ParseRawCsv(
      "traj_id,lat,lon,unix_timestamp\n"
      "b,35.7,139.7,20\n"
      "a,35.6,139.6,5\n"
      "b,35.71,139.71,10\n"
      "b,35.72,139.72,10\n");
  ASSERT_TRUE(raw.ok()) << raw.status();
  ASSERT_EQ(raw->size(), 2u);
  EXPECT_EQ((*raw)[0].id, "b");
  ASSERT_EQ((*raw)[0].points.size(), 2u);
  EXPECT_EQ((*raw)[0].points[0].timestamp, 10);
  EXPECT_EQ((*raw)[0].points[0].lat, 35.71);
  EXPECT_EQ((*raw)[1].id, "a");
  EXPECT_FALSE(ParseRawCsv("id,lat,lon,time\nx,1,2,3\n").ok());
  EXPECT_FALSE(ParseRawCsv("traj_id,lat,lon,unix_timestamp\nx,1,2\n").ok());
  EXPECT_FALSE(ParseRawCsv("traj_id,lat,lon,unix_timestamp\nx,1,zz,3\n").ok());
}

TEST(BuildDatasetTest, DropsEmptyTrajectories) {
  std::vector<RawTrajectory> raw(2);
  raw[0].id = "still";
  for (int i = 0; i < 20; ++i) raw[0].points.push_back({0.3, 0.6, 60.0 * i});
  raw[1].id = "moving";
  for (int i = 0; i < 5; ++i) raw[1].points.push_back({0.1 * i, 0.1, 60.0 * i});
  PreprocessConfig config;
  const auto d = BuildDataset(raw, UnitGrid(), config);
  ASSERT_TRUE(d.ok()) << d.status();
  ASSERT_EQ(d->size(), 1u);
  EXPECT_EQ(d->trajectories[0], (Trajectory{{2 * 8 + 4, 0}}));
  EXPECT_TRUE(ValidateDataset(*d).ok());
}

TEST(RandomDatasetTest, ShapeAndDeterminism) {
  EXPECT_EQ(GenRandomDataset(8, 0, 1)->size(), 0u);
  const Dataset d = *GenRandomDataset(32, 10000, 1);
  EXPECT_EQ(d.size(), 10000u);
  EXPECT_TRUE(ValidateDataset(d).ok());
  for (const Trajectory& t : d.trajectories) {
    ASSERT_EQ(t.size(), 2u);
    EXPECT_NE(t[0].cell, t[1].cell);
    EXPECT_EQ(t[0].slot, 0);
    EXPECT_EQ(t[1].slot, 1);
  }
  EXPECT_EQ(*GenRandomDataset(32, 100, 9), *GenRandomDataset(32, 100, 9));
  EXPECT_NE(*GenRandomDataset(32, 100, 9), *GenRandomDataset(32, 100, 10));
}

TEST(RandomDatasetTest, FirstVisitsAreUniform) {
  constexpr int64_t kN = 100000;
  const Dataset d = *GenRandomDataset(8, kN, 2024);
  std::vector<int64_t> counts(64, 0);
  for (const Trajectory& t : d.trajectories) ++counts[t[0].cell];
  const double mean = kN / 64.0;
  const double sd = std::sqrt(kN * (1.0 / 64) * (63.0 / 64));
  for (int c = 0; c < 64; ++c) EXPECT_LT(std::abs(counts[c] - mean), 3 * sd) << c;
}

TEST(StraightDatasetTest, ConstructionAndFirstRows) {
  const Dataset d = *GenStraightDataset(32, 10000, 4);
  EXPECT_EQ(d.size(), 10000u);
  EXPECT_TRUE(ValidateDataset(d).ok());
  for (const Trajectory& t : d.trajectories) {
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[1].cell - t[0].cell, 32);
    EXPECT_EQ(t[2].cell - t[1].cell, 32);
  }
  std::set<int> rows;
  const Dataset small = *GenStraightDataset(8, 5000, 4);
  for (const Trajectory& t : small.trajectories) {
    rows.insert(t[0].cell / 8);
  }
  EXPECT_EQ(rows, (std::set<int>{0, 2, 4}));
  EXPECT_FALSE(GenStraightDataset(2, 10, 4).ok());
}

}  // namespace
}  // namespace hrnet::preprocess
