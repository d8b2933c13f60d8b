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

#ifndef HRNET_EVALUATE_H_
#define HRNET_EVALUATE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "hrnet/key_value.h"
#include "hrnet/trajectory.h"

namespace hrnet::evaluate {

// Base-2 Jensen-Shannon divergence, in [0, 1].
absl::StatusOr<double> JsDivergence(std::span<const double> p,
                                    std::span<const double> q);

// Mean over queries of |real - gen| / max(real, phi).
absl::StatusOr<double> AverageRelativeError(std::span<const double> real,
                                            std::span<const double> gen, double phi);

struct HistogramSpec {
  double d_max = 0.0;
  int n_bin = 20;

  // Equal-width bin of x; values beyond d_max land in the last bin.
  int Bin(double x) const;
};

struct EvalConfig {
  int n_bin = 20;
  double phi = 5.0;
  int n_starts = 30;
  int n_density_queries = 500;
  int max_patterns = 200;
  int min_pattern_length = 3;
  uint64_t query_seed = 0;
};

// Everything the report derives from the real dataset.
struct QuerySet {
  std::vector<int32_t> starts;  // most frequent first cells, ties by id
  std::vector<std::vector<int32_t>> density_queries;
  std::vector<std::vector<int32_t>> patterns;
  HistogramSpec travel_distance;
  HistogramSpec diameter;
};

absl::StatusOr<QuerySet> BuildQuerySet(const Dataset& real, const EvalConfig& config);

// One cell set per line, cells separated by spaces.
absl::StatusOr<std::vector<std::vector<int32_t>>> ParseCellLists(absl::string_view text);

enum class StartMetric { kWaypoint, kDestination, kTransition, kRoute };

// Per start cell: for destination / transition a distribution over cells;
// for waypoint / route the per-cell presence probability. nullopt when no
// trajectory qualifies (transition needs length >= 2).
std::vector<std::optional<std::vector<double>>> StartConditioned(
    const Dataset& data, StartMetric metric, std::span<const int32_t> starts);

// Cells of the 8-connected rasterized segment a -> b, endpoints included.
std::vector<int32_t> LineCells(int w, int32_t a, int32_t b);
// Union of the segments between consecutive visits (the first cell for a
// single visit), sorted.
std::vector<int32_t> RouteCells(int w, const Trajectory& trajectory);

enum class ScalarMetric { kTravelDistance, kDiameter };
// Per-trajectory value in meters between cell centers.
std::vector<double> ScalarValues(const Dataset& data, ScalarMetric metric);
std::vector<double> Histogram(std::span<const double> values, const HistogramSpec& spec);

// Visit i occupies slots [slot_i, slot_{i+1}); the last visit occupies its
// own slot only. Per slot, the distribution of occupied cells, or nullopt if
// no trajectory is present.
std::vector<std::optional<std::vector<double>>> DensityAtT(const Dataset& data);

// Trajectories touching any cell of each query.
std::vector<double> CountDensityQueries(const Dataset& data,
                                        std::span<const std::vector<int32_t>> queries);
// Trajectories containing each pattern as a contiguous run of cells.
std::vector<double> CountPatterns(const Dataset& data,
                                  std::span<const std::vector<int32_t>> patterns);

struct MetricReport {
  double waypoint = 0.0;
  double destination = 0.0;
  double transition = 0.0;
  double travel_distance = 0.0;
  double diameter = 0.0;
  double route = 0.0;
  double density_t = 0.0;
  double traj_density = 0.0;
  double traj_pattern = 0.0;

  // Bookkeeping: starts or slots absent from the real data are skipped;
  // those absent only from the generated data score the maximum JS of 1.
  int skipped_starts = 0;
  int penalized_starts = 0;
  int skipped_slots = 0;
  int penalized_slots = 0;
  int num_patterns = 0;

  static std::vector<std::string> MetricNames();
  std::vector<double> Values() const;
  KeyValueBlock ToKeyValue() const;
  static std::string CsvHeader();
  std::string CsvRow() const;
};

// All nine discrepancies. Queries come from `queries` when given, otherwise
// from BuildQuerySet(real, config). Generated counts are rescaled to the
// real dataset size before the relative errors.
absl::StatusOr<MetricReport> FullReport(const Dataset& real, const Dataset& gen,
                                        const EvalConfig& config,
                                        const QuerySet* queries = nullptr);

struct SweepRow {
  std::string arm;
  double epsilon = 0.0;
  uint64_t seed = 0;
  MetricReport report;
};
std::string FormatSweepCsv(std::span<const SweepRow> rows);

}  // namespace hrnet::evaluate

#endif  // HRNET_EVALUATE_H_
