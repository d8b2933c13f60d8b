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

#ifndef HRNET_AUDIT_H_
#define HRNET_AUDIT_H_

#include <cstdint>
#include <map>
#include <mutex>
#include <string>

#include "absl/strings/string_view.h"
#include "hrnet/trajectory.h"

namespace hrnet {

// Counts raw-trajectory reads, attributed to the phase that was active when
// each read happened.
class AccessAudit {
 public:
  void BeginPhase(absl::string_view phase);
  void RecordReads(int64_t n);

  int64_t Reads(absl::string_view phase) const;
  int64_t TotalReads() const;
  std::map<std::string, int64_t> Summary() const;

 private:
  mutable std::mutex mu_;
  std::string phase_ = "unattributed";
  std::map<std::string, int64_t> reads_;
};

// Read access to a dataset's trajectories. Grid and size metadata are free;
// every Read() is recorded in the audit when one is attached.
class DatasetView {
 public:
  explicit DatasetView(const Dataset& dataset, AccessAudit* audit = nullptr)
      : dataset_(dataset), audit_(audit) {}

  size_t size() const { return dataset_.size(); }
  const geo::GridSpec& grid() const { return dataset_.grid; }
  int n_time() const { return dataset_.n_time; }

  const Trajectory& Read(size_t i) const {
    if (audit_ != nullptr) audit_->RecordReads(1);
    return dataset_.trajectories[i];
  }

 private:
  const Dataset& dataset_;
  AccessAudit* audit_;
};

}  // namespace hrnet

#endif  // HRNET_AUDIT_H_
