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

#include "hrnet/trajectory.h"


#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "absl/strings/strip.h"
#include "hrnet/key_value.h"
#include "hrnet/status_macros.h"

namespace hrnet {
namespace {

constexpr absl::string_view kMagic = "# hrnet trajectory dataset v1";
constexpr absl::string_view kSeparator = "---";

}  // namespace

absl::Status ValidateTrajectory(const Trajectory& trajectory, int64_t num_cells,
                                int n_time) {
  if (trajectory.empty()) {
    return absl::InvalidArgumentError("empty trajectory");
  }
  for (size_t i = 0; i < trajectory.size(); ++i) {
    const Visit& v = trajectory[i];
    if (v.cell < 0 || v.cell >= num_cells) {
      return absl::OutOfRangeError(absl::StrCat("cell ", v.cell, " at position ", i));
    }
    if (v.slot < 0 || v.slot >= n_time) {
      return absl::OutOfRangeError(absl::StrCat("slot ", v.slot, " at position ", i));
    }
    if (i > 0) {
      if (trajectory[i - 1].cell == v.cell) {
        return absl::InvalidArgumentError(
            absl::StrCat("repeated cell ", v.cell, " at position ", i));
      }
      if (trajectory[i - 1].slot > v.slot) {
        return absl::InvalidArgumentError(
            absl::StrCat("decreasing slot at position ", i));
      }
    }
  }
  return absl::OkStatus();
}

absl::Status ValidateDataset(const Dataset& dataset) {
  if (dataset.n_time < 1) return absl::InvalidArgumentError("n_time must be >= 1");
  for (size_t i = 0; i < dataset.trajectories.size(); ++i) {
    absl::Status s = ValidateTrajectory(dataset.trajectories[i],
                                        dataset.grid.num_cells(), dataset.n_time);
    if (!s.ok()) {
      return absl::Status(s.code(), absl::StrCat("trajectory ", i, ": ", s.message()));
    }
  }
  return absl::OkStatus();
}

std::string FormatDataset(const Dataset& dataset) {
  KeyValueBlock header;
  const geo::BoundingBox& b = dataset.grid.bbox();
  header.SetDouble("min_lat", b.min_lat);
  header.SetDouble("min_lon", b.min_lng);
  header.SetDouble("max_lat", b.max_lat);
  header.SetDouble("max_lon", b.max_lng);
  header.SetInt("w", dataset.grid.width());
  header.SetInt("n_time", dataset.n_time);
  header.SetInt("count", static_cast<int64_t>(dataset.trajectories.size()));
  std::string out = absl::StrCat(kMagic, "\n", header.Format(), kSeparator, "\n");
  for (const Trajectory& t : dataset.trajectories) {
    for (size_t i = 0; i < t.size(); ++i) {
      absl::StrAppend(&out, i == 0 ? "" : " ", t[i].cell, ":", t[i].slot);
    }
    out.push_back('\n');
  }
  return out;
}

absl::StatusOr<Dataset> ParseDataset(absl::string_view text) {
  const size_t sep = text.find(absl::StrCat("\n", kSeparator, "\n"));
  if (!absl::StartsWith(text, kMagic) || sep == absl::string_view::npos) {
    return absl::InvalidArgumentError("not an hrnet trajectory dataset");
  }
  ASSIGN_OR_RETURN(KeyValueBlock header, KeyValueBlock::Parse(text.substr(0, sep)));
  geo::BoundingBox bbox;
  ASSIGN_OR_RETURN(bbox.min_lat, header.GetDouble("min_lat"));
  ASSIGN_OR_RETURN(bbox.min_lng, header.GetDouble("min_lon"));
  ASSIGN_OR_RETURN(bbox.max_lat, header.GetDouble("max_lat"));
  ASSIGN_OR_RETURN(bbox.max_lng, header.GetDouble("max_lon"));
  ASSIGN_OR_RETURN(int64_t w, header.GetInt("w"));
  ASSIGN_OR_RETURN(int64_t n_time, header.GetInt("n_time"));
  ASSIGN_OR_RETURN(int64_t count, header.GetInt("count"));

  Dataset dataset;
  ASSIGN_OR_RETURN(dataset.grid, geo::GridSpec::Create(bbox, static_cast<int>(w)));
  dataset.n_time = static_cast<int>(n_time);
  dataset.trajectories.reserve(count);

  absl::string_view body = text.substr(sep + kSeparator.size() + 2);
  for (absl::string_view line : absl::StrSplit(body, '\n', absl::SkipEmpty())) {
    Trajectory t;
    for (absl::string_view pair : absl::StrSplit(line, ' ', absl::SkipEmpty())) {
      const size_t colon = pair.find(':');
      if (colon == absl::string_view::npos) {
        return absl::InvalidArgumentError(absl::StrCat("bad visit '", pair, "'"));
      }
      ASSIGN_OR_RETURN(int64_t cell, ParseInt(pair.substr(0, colon)));
      ASSIGN_OR_RETURN(int64_t slot, ParseInt(pair.substr(colon + 1)));
      t.push_back({static_cast<int32_t>(cell), static_cast<int32_t>(slot)});
    }
    dataset.trajectories.push_back(std::move(t));
  }
  if (static_cast<int64_t>(dataset.trajectories.size()) != count) {
    return absl::DataLossError(absl::StrCat("header count ", count, " but found ",
                                            dataset.trajectories.size(),
                                            " trajectories"));
  }
  RETURN_IF_ERROR(ValidateDataset(dataset));
  return dataset;
}

absl::Status SaveDataset(const Dataset& dataset, const std::string& path) {
  return WriteFile(path, FormatDataset(dataset));
}

absl::StatusOr<Dataset> LoadDataset(const std::string& path) {
  ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  return ParseDataset(text);
}

}  // namespace hrnet
