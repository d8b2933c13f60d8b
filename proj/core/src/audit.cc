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

#include "hrnet/audit.h"

namespace hrnet {

void AccessAudit::BeginPhase(absl::string_view phase) {
  std::lock_guard<std::mutex> lock(mu_);
  phase_ = std::string(phase);
  reads_.try_emplace(phase_, 0);
}

void AccessAudit::RecordReads(int64_t n) {
  std::lock_guard<std::mutex> lock(mu_);
  reads_[phase_] += n;
}

int64_t AccessAudit::Reads(absl::string_view phase) const {
  std::lock_guard<std::mutex> lock(mu_);
  const auto it = reads_.find(std::string(phase));
  return it == reads_.end() ? 0 : it->second;
}

int64_t AccessAudit::TotalReads() const {
  std::lock_guard<std::mutex> lock(mu_);
  int64_t total = 0;
  for (const auto& [phase, n] : reads_) total += n;
  return total;
}

std::map<std::string, int64_t> AccessAudit::Summary() const {
  std::lock_guard<std::mutex> lock(mu_);
  return reads_;
}

}  // namespace hrnet
