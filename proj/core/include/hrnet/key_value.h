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

#ifndef HRNET_KEY_VALUE_H_
#define HRNET_KEY_VALUE_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace hrnet {

// Shortest decimal form that parses back to the identical double.
std::string FormatDouble(double value);
absl::StatusOr<double> ParseDouble(absl::string_view text);
absl::StatusOr<int64_t> ParseInt(absl::string_view text);

// Ordered "key=value" text block. Used for file headers, reports and config
// snapshots. Lines starting with '#' and blank lines are ignored on parse.
class KeyValueBlock {
 public:
  void Set(absl::string_view key, std::string value);
  void SetDouble(absl::string_view key, double value);
  void SetInt(absl::string_view key, int64_t value);

  bool Has(absl::string_view key) const;
  absl::StatusOr<std::string> Get(absl::string_view key) const;
  absl::StatusOr<double> GetDouble(absl::string_view key) const;
  absl::StatusOr<int64_t> GetInt(absl::string_view key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  std::string Format() const;
  static absl::StatusOr<KeyValueBlock> Parse(absl::string_view text);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

absl::StatusOr<std::string> ReadFile(const std::string& path);
absl::Status WriteFile(const std::string& path, absl::string_view contents);

}  // namespace hrnet

#endif  // HRNET_KEY_VALUE_H_
