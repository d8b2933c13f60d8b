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

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "hrnet/key_value.h"
#include "hrnet/rng.h"
#include "hrnet/status_macros.h"

namespace hrnet::preprocess {
namespace {

geo::LatLng Position(const RawPoint& p) { return {p.lat, p.lng}; }

bool AllWithin(const std::vector<RawPoint>& points, size_t begin, size_t end,
               const geo::LatLng& center, double radius) {
  for (size_t k = begin; k < end; ++k) {
    if (geo::DistanceMeters(Position(points[k]), center) > radius) return false;
  }
  return true;
}

}  // namespace

std::vector<StayPoint> ExtractStayPoints(const RawTrajectory& raw,
                                         const StayPointConfig& config) {
  std::vector<StayPoint> stays;
  const std::vector<RawPoint>& pts = raw.points;
  const double min_seconds = config.min_duration_minutes * 60.0;
  size_t i = 0;
  while (i < pts.size()) {
    double sum_lat = pts[i].lat;
    double sum_lng = pts[i].lng;
    size_t j = i + 1;
    while (j < pts.size()) {
      if (geo::DistanceMeters(Position(pts[i]), Position(pts[j])) > config.radius_m) {
        break;
      }
      const double n = static_cast<double>(j - i + 1);
      const geo::LatLng candidate{(sum_lat + pts[j].lat) / n,
                                  (sum_lng + pts[j].lng) / n};
      if (!AllWithin(pts, i, j + 1, candidate, config.radius_m)) break;
      sum_lat += pts[j].lat;
      sum_lng += pts[j].lng;
      ++j;
    }
    const double duration = pts[j - 1].timestamp - pts[i].timestamp;
    if (duration > 0.0 && duration >= min_seconds) {
      const double n = static_cast<double>(j - i);
      stays.push_back({{sum_lat / n, sum_lng / n}, pts[i].timestamp, pts[j - 1].timestamp});
      i = j;
    } else {
      ++i;
    }
  }
  return stays;
}

int TimeSlot(double timestamp, const TimeHorizon& horizon, int n_time) {
  const double t = (timestamp - horizon.start) / (horizon.end - horizon.start) *
                   static_cast<double>(n_time);
  return std::clamp(static_cast<int>(std::floor(t)), 0, n_time - 1);
}

absl::StatusOr<Trajectory> Discretize(const std::vector<StayPoint>& stays,
                                      const geo::GridSpec& grid, int n_time,
                                      const TimeHorizon& horizon) {
  if (n_time < 1) return absl::InvalidArgumentError("n_time must be positive");
  if (!(horizon.end > horizon.start)) {
    return absl::InvalidArgumentError("time horizon must be non-empty");
  }
  Trajectory out;
  for (const StayPoint& s : stays) {
    if (s.arrival < horizon.start || s.arrival > horizon.end) {
      return absl::OutOfRangeError(
          absl::StrCat("stay arrival ", s.arrival, " outside the time horizon"));
    }
    ASSIGN_OR_RETURN(geo::CellId cell, geo::LatLngToCell(grid, s.centroid));
    const int slot = TimeSlot(s.arrival, horizon, n_time);
    if (!out.empty() && out.back().cell == cell.value()) continue;
    if (!out.empty() && out.back().slot > slot) {
      return absl::InvalidArgumentError("stay points are not time ordered");
    }
    out.push_back({static_cast<int32_t>(cell.value()), slot});
  }
  if (out.empty()) return absl::NotFoundError("no visits after discretization");
  return out;
}

absl::StatusOr<std::vector<RawTrajectory>> ParseRawCsv(absl::string_view text) {
  std::vector<absl::string_view> lines = absl::StrSplit(text, '\n', absl::SkipWhitespace());
  if (lines.empty()) return absl::InvalidArgumentError("empty CSV");
  std::vector<std::string> header;
  for (absl::string_view h : absl::StrSplit(lines[0], ',')) {
    header.push_back(absl::AsciiStrToLower(absl::StripAsciiWhitespace(h)));
  }
  const std::vector<std::string> expected = {"traj_id", "lat", "lon", "unix_timestamp"};
  if (header != expected) {
    return absl::InvalidArgumentError(
        "CSV header must be traj_id,lat,lon,unix_timestamp");
  }
  std::vector<RawTrajectory> out;
  std::unordered_map<std::string, size_t> index;
  for (size_t n = 1; n < lines.size(); ++n) {
    std::vector<absl::string_view> cols = absl::StrSplit(lines[n], ',');
    if (cols.size() != 4) {
      return absl::InvalidArgumentError(absl::StrCat("line ", n + 1, ": expected 4 columns"));
    }
    const std::string id(absl::StripAsciiWhitespace(cols[0]));
    RawPoint p;
    ASSIGN_OR_RETURN(p.lat, ParseDouble(cols[1]));
    ASSIGN_OR_RETURN(p.lng, ParseDouble(cols[2]));
    ASSIGN_OR_RETURN(p.timestamp, ParseDouble(cols[3]));
    auto [it, inserted] = index.emplace(id, out.size());
    if (inserted) out.push_back({id, {}});
    out[it->second].points.push_back(p);
  }
  for (RawTrajectory& t : out) {
    std::stable_sort(t.points.begin(), t.points.end(),
                     [](const RawPoint& a, const RawPoint& b) {
                       return a.timestamp < b.timestamp;
                     });
    t.points.erase(std::unique(t.points.begin(), t.points.end(),
                               [](const RawPoint& a, const RawPoint& b) {
                                 return a.timestamp == b.timestamp;
                               }),
                   t.points.end());
  }
  return out;
}

absl::StatusOr<std::vector<RawTrajectory>> ReadRawCsv(const std::string& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  return ParseRawCsv(text);
}

absl::StatusOr<Dataset> BuildDataset(const std::vector<RawTrajectory>& raw,
                                     const geo::GridSpec& grid,
                                     const PreprocessConfig& config) {
  Dataset dataset;
  dataset.grid = grid;
  dataset.n_time = config.n_time;
  for (const RawTrajectory& r : raw) {
    if (r.points.empty()) continue;
    std::vector<StayPoint> stays = ExtractStayPoints(r, config.stay);
    // Stays outside the map are dropped rather than failing the whole trace.
    std::erase_if(stays, [&](const StayPoint& s) {
      return !grid.bbox().Contains(s.centroid) || s.arrival < config.horizon.start ||
             s.arrival > config.horizon.end;
    });
    absl::StatusOr<Trajectory> t = Discretize(stays, grid, config.n_time, config.horizon);
    if (absl::IsNotFound(t.status())) continue;
    if (!t.ok()) return t.status();
    dataset.trajectories.push_back(*std::move(t));
  }
  return dataset;
}

geo::BoundingBox SyntheticBoundingBox() {
  return {35.60, 139.60, 35.80, 139.80};
}

absl::StatusOr<Dataset> GenRandomDataset(int w, int64_t n, uint64_t seed) {
  if (w < 2) return absl::InvalidArgumentError("random dataset needs w >= 2");
  if (n < 0) return absl::InvalidArgumentError("negative trajectory count");
  Dataset dataset;
  ASSIGN_OR_RETURN(dataset.grid, geo::GridSpec::Create(SyntheticBoundingBox(), w));
  dataset.n_time = 2;
  dataset.trajectories.resize(n);
  const int32_t cells = w * w;
  for (int64_t i = 0; i < n; ++i) {
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(i)));
    std::uniform_int_distribution<int32_t> cell(0, cells - 1);
    const int32_t first = cell(rng);
    int32_t second = cell(rng);
    while (second == first) second = cell(rng);
    dataset.trajectories[i] = {{first, 0}, {second, 1}};
  }
  return dataset;
}

absl::StatusOr<Dataset> GenStraightDataset(int w, int64_t n, uint64_t seed) {
  if (w < 4) return absl::InvalidArgumentError("straight dataset needs w >= 4");
  if (n < 0) return absl::InvalidArgumentError("negative trajectory count");
  Dataset dataset;
  ASSIGN_OR_RETURN(dataset.grid, geo::GridSpec::Create(SyntheticBoundingBox(), w));
  dataset.n_time = 3;
  dataset.trajectories.resize(n);
  const int32_t start_rows = (w - 3) / 2 + 1;  // rows 0, 2, ..., <= w - 3
  for (int64_t i = 0; i < n; ++i) {
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(i)));
    std::uniform_int_distribution<int32_t> pick(0, start_rows * w - 1);
    const int32_t k = pick(rng);
    const int32_t first = (2 * (k / w)) * w + k % w;
    dataset.trajectories[i] = {{first, 0}, {first + w, 1}, {first + 2 * w, 2}};
  }
  return dataset;
}

}  // namespace hrnet::preprocess
