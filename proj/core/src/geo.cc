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

#include "hrnet/geo.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "hrnet/status_macros.h"

namespace hrnet::geo {
namespace {

constexpr double kEarthRadiusMeters = 6371008.8;
constexpr double kDegToRad = M_PI / 180.0;

int64_t AxisIndex(double x, double lo, double hi, int64_t n) {
  const double t = (x - lo) / (hi - lo) * static_cast<double>(n);
  int64_t i = static_cast<int64_t>(std::floor(t));
  return std::clamp<int64_t>(i, 0, n - 1);
}

}  // namespace

absl::StatusOr<CellId> CellId::Create(int64_t value, int resolution) {
  if (resolution < 0 || resolution > 30) {
    return absl::InvalidArgumentError(
        absl::StrCat("resolution out of range: ", resolution));
  }
  const int64_t side = int64_t{1} << resolution;
  if (value < 0 || value >= side * side) {
    return absl::OutOfRangeError(absl::StrCat("cell ", value,
                                              " invalid at resolution ",
                                              resolution));
  }
  return CellId(value, resolution);
}

absl::StatusOr<GridSpec> GridSpec::Create(const BoundingBox& bbox, int width) {
  if (width < 1 || (width & (width - 1)) != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("grid width must be a power of 2, got ", width));
  }
  if (!(bbox.max_lat > bbox.min_lat) || !(bbox.max_lng > bbox.min_lng)) {
    return absl::InvalidArgumentError("bounding box must have positive area");
  }
  int depth = 0;
  while ((1 << depth) < width) ++depth;
  return GridSpec(bbox, width, depth);
}

absl::StatusOr<GridSpec> GridSpec::FromDepth(const BoundingBox& bbox,
                                             int depth) {
  if (depth < 0 || depth > 15) {
    return absl::InvalidArgumentError(absl::StrCat("bad depth ", depth));
  }
  return Create(bbox, 1 << depth);
}

absl::StatusOr<CellId> LatLngToCell(const GridSpec& spec, const LatLng& point) {
  const BoundingBox& b = spec.bbox();
  if (!std::isfinite(point.lat) || !std::isfinite(point.lng) ||
      !b.Contains(point)) {
    return absl::OutOfRangeError(absl::StrCat(
        "point (", point.lat, ", ", point.lng, ") outside bounding box"));
  }
  const int64_t row = AxisIndex(point.lat, b.min_lat, b.max_lat, spec.width());
  const int64_t col = AxisIndex(point.lng, b.min_lng, b.max_lng, spec.width());
  return CellId::FromRowCol(row, col, spec.depth());
}

absl::StatusOr<CellId> UpRes(const CellId& cell, int target) {
  if (target < 0 || target > cell.resolution()) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot map resolution ", cell.resolution(),
                     " up to resolution ", target));
  }
  const int shift = cell.resolution() - target;
  return CellId::FromRowCol(cell.row() >> shift, cell.col() >> shift, target);
}

absl::StatusOr<LatLng> CellCenter(const GridSpec& spec, const CellId& cell) {
  if (cell.resolution() > spec.depth()) {
    return absl::OutOfRangeError("cell finer than the grid");
  }
  RETURN_IF_ERROR(CellId::Create(cell.value(), cell.resolution()).status());
  const BoundingBox& b = spec.bbox();
  const double side = static_cast<double>(cell.side());
  const double lat_step = (b.max_lat - b.min_lat) / side;
  const double lng_step = (b.max_lng - b.min_lng) / side;
  return LatLng{b.min_lat + (static_cast<double>(cell.row()) + 0.5) * lat_step,
                b.min_lng + (static_cast<double>(cell.col()) + 0.5) * lng_step};
}

double DistanceMeters(const LatLng& a, const LatLng& b) {
  const double mean_lat = 0.5 * (a.lat + b.lat) * kDegToRad;
  const double x = (b.lng - a.lng) * kDegToRad * std::cos(mean_lat);
  const double y = (b.lat - a.lat) * kDegToRad;
  return kEarthRadiusMeters * std::sqrt(x * x + y * y);
}

absl::StatusOr<Assignment> SolveLinearAssignment(std::span<const double> cost,
                                                 int rows, int cols) {
  if (rows < 0 || cols < 0 ||
      cost.size() != static_cast<size_t>(rows) * static_cast<size_t>(cols)) {
    return absl::InvalidArgumentError("cost matrix size mismatch");
  }
  if (rows > cols) {
    return absl::FailedPreconditionError(absl::StrCat(
        "cannot assign ", rows, " rows injectively to ", cols, " columns"));
  }
  for (const double c : cost) {
    if (!std::isfinite(c)) {
      return absl::InvalidArgumentError("cost matrix has non-finite entries");
    }
  }
  Assignment result;
  result.column_of_row.assign(rows, -1);
  if (rows == 0) return result;

  // 1-based potentials; column 0 is the virtual source of each augmentation.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0), min_slack(cols + 1);
  std::vector<int> row_of_col(cols + 1, 0), way(cols + 1, 0);
  std::vector<char> used(cols + 1);
  auto at = [&](int r, int c) {
    return cost[static_cast<size_t>(r - 1) * cols + (c - 1)];
  };

  for (int r = 1; r <= rows; ++r) {
    row_of_col[0] = r;
    int col0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const int row0 = row_of_col[col0];
      double delta = kInf;
      int col1 = 0;
      for (int c = 1; c <= cols; ++c) {
        if (used[c]) continue;
        const double slack = at(row0, c) - u[row0] - v[c];
        if (slack < min_slack[c]) {
          min_slack[c] = slack;
          way[c] = col0;
        }
        if (min_slack[c] < delta) {
          delta = min_slack[c];
          col1 = c;
        }
      }
      for (int c = 0; c <= cols; ++c) {
        if (used[c]) {
          u[row_of_col[c]] += delta;
          v[c] -= delta;
        } else {
          min_slack[c] -= delta;
        }
      }
      col0 = col1;
    } while (row_of_col[col0] != 0);
    do {
      const int col1 = way[col0];
      row_of_col[col0] = row_of_col[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  for (int c = 1; c <= cols; ++c) {
    if (row_of_col[c] != 0) result.column_of_row[row_of_col[c] - 1] = c - 1;
  }
  for (int r = 0; r < rows; ++r) {
    result.total_cost += cost[static_cast<size_t>(r) * cols + result.column_of_row[r]];
  }
  return result;
}

int MinimumDepth(int64_t n) {
  int d = 0;
  while ((int64_t{1} << (2 * d)) < n) ++d;
  return d;
}

absl::StatusOr<PoiAssignment> AssignScatteredPois(std::span<const LatLng> pois,
                                                  const GridSpec& grid) {
  const int64_t n_cells = grid.num_cells();
  if (static_cast<int64_t>(pois.size()) > n_cells) {
    return absl::ResourceExhaustedError(
        absl::StrCat(pois.size(), " POIs exceed grid capacity ", n_cells));
  }
  std::vector<LatLng> centers;
  centers.reserve(n_cells);
  for (int64_t c = 0; c < n_cells; ++c) {
    ASSIGN_OR_RETURN(LatLng center, CellCenter(grid, CellId(c, grid.depth())));
    centers.push_back(center);
  }
  const int rows = static_cast<int>(pois.size());
  const int cols = static_cast<int>(n_cells);
  std::vector<double> cost(static_cast<size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      cost[static_cast<size_t>(i) * cols + j] = DistanceMeters(pois[i], centers[j]);
    }
  }
  ASSIGN_OR_RETURN(Assignment assignment, SolveLinearAssignment(cost, rows, cols));
  PoiAssignment out;
  out.grid = grid;
  out.cost_rows = rows;
  out.cost_cols = cols;
  out.total_cost = assignment.total_cost;
  out.cell_of_poi.reserve(rows);
  for (const int col : assignment.column_of_row) {
    out.cell_of_poi.emplace_back(col, grid.depth());
  }
  return out;
}

absl::StatusOr<PoiAssignment> AssignScatteredPois(std::span<const LatLng> pois) {
  if (pois.empty()) {
    return absl::InvalidArgumentError("no POIs to assign");
  }
  BoundingBox bbox{pois[0].lat, pois[0].lng, pois[0].lat, pois[0].lng};
  for (const LatLng& p : pois) {
    bbox.min_lat = std::min(bbox.min_lat, p.lat);
    bbox.max_lat = std::max(bbox.max_lat, p.lat);
    bbox.min_lng = std::min(bbox.min_lng, p.lng);
    bbox.max_lng = std::max(bbox.max_lng, p.lng);
  }
  // A degenerate extent gets a small pad so the box has positive area.
  constexpr double kPadDegrees = 1e-6;
  if (bbox.max_lat <= bbox.min_lat) {
    bbox.min_lat -= kPadDegrees;
    bbox.max_lat += kPadDegrees;
  }
  if (bbox.max_lng <= bbox.min_lng) {
    bbox.min_lng -= kPadDegrees;
    bbox.max_lng += kPadDegrees;
  }
  ASSIGN_OR_RETURN(GridSpec grid,
                   GridSpec::FromDepth(bbox, MinimumDepth(pois.size())));
  return AssignScatteredPois(pois, grid);
}

}  // namespace hrnet::geo
