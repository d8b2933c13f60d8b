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

#ifndef HRNET_TRAJECTORY_H_
#define HRNET_TRAJECTORY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "hrnet/geo.h"

namespace hrnet {

// One stay: a finest-resolution cell and the time slot it was reached in.
struct Visit {
  int32_t cell = 0;
  int32_t slot = 0;

  friend bool operator==(const Visit&, const Visit&) = default;
};

using Trajectory = std::vector<Visit>;

struct Dataset {
  geo::GridSpec grid;
  int n_time = 1;
  std::vector<Trajectory> trajectories;

  size_t size() const { return trajectories.size(); }
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Non-empty, valid cells and slots, no consecutive repeated cell, slots
// non-decreasing.
absl::Status ValidateTrajectory(const Trajectory& trajectory, int64_t num_cells,
                                int n_time);
absl::Status ValidateDataset(const Dataset& dataset);

// Discretized dataset text format: a key=value header (grid bbox, w, n_time,
// count), a "---" separator, then one line per trajectory of space-separated
// "cell:slot" pairs. Doubles use shortest round-trip form, so
// ParseDataset(FormatDataset(d)) == d.
std::string FormatDataset(const Dataset& dataset);
absl::StatusOr<Dataset> ParseDataset(absl::string_view text);
absl::Status SaveDataset(const Dataset& dataset, const std::string& path);
absl::StatusOr<Dataset> LoadDataset(const std::string& path);

}  // namespace hrnet

#endif  // HRNET_TRAJECTORY_H_
