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

#ifndef HRNET_GEO_H_
#define HRNET_GEO_H_

#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"

namespace hrnet::geo {

struct LatLng {
  double lat = 0.0;
  double lng = 0.0;
};

struct BoundingBox {
  double min_lat = 0.0;
  double min_lng = 0.0;
  double max_lat = 0.0;
  double max_lng = 0.0;

  bool Contains(const LatLng& p) const {
    return p.lat >= min_lat && p.lat <= max_lat && p.lng >= min_lng &&
           p.lng <= max_lng;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// A cell of the square grid hierarchy. At resolution r the map is divided
// into 2^r x 2^r cells; value = row * 2^r + col, rows follow latitude and
// columns follow longitude, both starting at the bbox minimum.
class CellId {
 public:
  CellId() = default;
  CellId(int64_t value, int resolution) : value_(value), resolution_(resolution) {}

  // Validates that `value` lies in [0, 4^resolution).
  static absl::StatusOr<CellId> Create(int64_t value, int resolution);
  static CellId FromRowCol(int64_t row, int64_t col, int resolution) {
    return CellId((row << resolution) + col, resolution);
  }

  int64_t value() const { return value_; }
  int resolution() const { return resolution_; }
  int64_t side() const { return int64_t{1} << resolution_; }
  int64_t row() const { return value_ >> resolution_; }
  int64_t col() const { return value_ & (side() - 1); }

  friend bool operator==(const CellId&, const CellId&) = default;

 private:
  int64_t value_ = 0;
  int resolution_ = 0;
};

// Uniform w x w grid over a bounding box, w = 2^depth.
class GridSpec {
 public:
  GridSpec() = default;

  static absl::StatusOr<GridSpec> Create(const BoundingBox& bbox, int width);
  static absl::StatusOr<GridSpec> FromDepth(const BoundingBox& bbox, int depth);

  const BoundingBox& bbox() const { return bbox_; }
  int width() const { return width_; }
  int depth() const { return depth_; }
  int64_t num_cells() const { return int64_t{width_} * width_; }

  bool ValidCell(int64_t value) const { return value >= 0 && value < num_cells(); }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  GridSpec(const BoundingBox& bbox, int width, int depth)
      : bbox_(bbox), width_(width), depth_(depth) {}

  BoundingBox bbox_;
  int width_ = 1;
  int depth_ = 0;
};

// Maps a point to its finest-resolution cell. Intervals are half-open
// [low, high); points on the top or right bbox edge fold into the last cell.
absl::StatusOr<CellId> LatLngToCell(const GridSpec& spec, const LatLng& point);

// The ancestor of `cell` at the coarser resolution `target`.
absl::StatusOr<CellId> UpRes(const CellId& cell, int target);

// Unchecked variant on raw values for hot loops.
inline int64_t UpResValue(int64_t value, int from, int to) {
  const int shift = from - to;
  const int64_t side = int64_t{1} << from;
  const int64_t row = value / side;
  const int64_t col = value % side;
  return ((row >> shift) << to) + (col >> shift);
}

// Midpoint of the cell rectangle. The cell may be at any resolution up to
// the grid's depth.
absl::StatusOr<LatLng> CellCenter(const GridSpec& spec, const CellId& cell);

// Equirectangular-approximation distance in meters.
double DistanceMeters(const LatLng& a, const LatLng& b);

// Result of a rectangular linear assignment problem.
struct Assignment {
  std::vector<int> column_of_row;  // column assigned to each row
  double total_cost = 0.0;
};

// Minimum-cost injective assignment of rows to columns for a row-major
// rows x cols cost matrix with rows <= cols. Shortest augmenting path with
// dual potentials (Jonker-Volgenant family).
absl::StatusOr<Assignment> SolveLinearAssignment(std::span<const double> cost,
                                                 int rows, int cols);

struct PoiAssignment {
  GridSpec grid;
  std::vector<CellId> cell_of_poi;  // finest-resolution cell per POI
  int cost_rows = 0;                // n_POI
  int cost_cols = 0;                // 4^d
  double total_cost = 0.0;          // meters
};

// Assigns each scattered POI to a distinct cell of `grid`, minimizing the
// total POI-to-cell-center distance.
absl::StatusOr<PoiAssignment> AssignScatteredPois(std::span<const LatLng> pois,
                                                  const GridSpec& grid);

// As above on a grid covering the POIs' extent with the smallest depth d
// such that |pois| <= 4^d.
absl::StatusOr<PoiAssignment> AssignScatteredPois(std::span<const LatLng> pois);

// Smallest d >= 0 with n <= 4^d.
int MinimumDepth(int64_t n);

}  // namespace hrnet::geo

#endif  // HRNET_GEO_H_
