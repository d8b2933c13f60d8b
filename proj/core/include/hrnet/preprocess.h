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

#ifndef HRNET_PREPROCESS_H_
#define HRNET_PREPROCESS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "hrnet/geo.h"
#include "hrnet/trajectory.h"

namespace hrnet::preprocess {

struct RawPoint {
  double lat = 0.0;
  double lng = 0.0;
  double timestamp = 0.0;  // seconds
};

struct RawTrajectory {
  std::string id;
  std::vector<RawPoint> points;  // strictly increasing timestamps
};

struct StayPoint {
  geo::LatLng centroid;
  double arrival = 0.0;
  double departure = 0.0;
};

struct StayPointConfig {
  double radius_m = 200.0;
  double min_duration_minutes = 10.0;
};

// Forward-scan window growth. A window anchored at point i grows while the
// next point is within the radius of the anchor and every member stays within
// the radius of the running centroid; windows lasting at least the minimum
// duration become stay points and the scan resumes after them.
std::vector<StayPoint> ExtractStayPoints(const RawTrajectory& raw,
                                         const StayPointConfig& config = {});

struct TimeHorizon {
  double start = 0.0;
  double end = 86400.0;
};

// Slot of a timestamp under an even division of the horizon; the horizon end
// folds into the last slot.
int TimeSlot(double timestamp, const TimeHorizon& horizon, int n_time);

// Converts ordered stay points to a trajectory, collapsing consecutive stays
// in the same cell (the first arrival's slot is kept). Returns NotFound when
// no visit remains.
absl::StatusOr<Trajectory> Discretize(const std::vector<StayPoint>& stays,
                                      const geo::GridSpec& grid, int n_time,
                                      const TimeHorizon& horizon);

// Reads "traj_id,lat,lon,unix_timestamp" CSV (header required). Points are
// grouped by id in order of first appearance and sorted by time; repeated
// timestamps keep the first sample.
absl::StatusOr<std::vector<RawTrajectory>> ParseRawCsv(absl::string_view text);
absl::StatusOr<std::vector<RawTrajectory>> ReadRawCsv(const std::string& path);

struct PreprocessConfig {
  StayPointConfig stay;
  int n_time = 24;
  TimeHorizon horizon;
};

// Stay-point extraction plus discretization for every raw trajectory;
// trajectories that end up empty are dropped.
absl::StatusOr<Dataset> BuildDataset(const std::vector<RawTrajectory>& raw,
                                     const geo::GridSpec& grid,
                                     const PreprocessConfig& config);

// Bounding box used for the synthetic ablation datasets.
geo::BoundingBox SyntheticBoundingBox();

// n length-2 trajectories with both cells uniform over the grid and
// l1 != l2 (the second cell is resampled on collision). Slots are 0, 1.
absl::StatusOr<Dataset> GenRandomDataset(int w, int64_t n, uint64_t seed);

// n length-3 trajectories: the first cell is uniform over cells whose row is
// even and at most w - 3, then two steps of +w (one row up each).
absl::StatusOr<Dataset> GenStraightDataset(int w, int64_t n, uint64_t seed);

}  // namespace hrnet::preprocess

#endif  // HRNET_PREPROCESS_H_
