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

#ifndef HRNET_STATUS_MACROS_H_
#define HRNET_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define HRNET_STATUS_CONCAT_INNER_(x, y) x##y
#define HRNET_STATUS_CONCAT_(x, y) HRNET_STATUS_CONCAT_INNER_(x, y)

// Evaluates `expr` (an absl::Status) and returns it from the enclosing
// function if it is not OK.
#define RETURN_IF_ERROR(expr)                  \
  do {                                         \
    const absl::Status _hrnet_status = (expr); \
    if (!_hrnet_status.ok()) {                 \
      return _hrnet_status;                    \
    }                                          \
  } while (false)

#define ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                           \
  if (!statusor.ok()) {                              \
    return statusor.status();                        \
  }                                                  \
  lhs = std::move(statusor).value()

// Evaluates `rexpr` (an absl::StatusOr<T>); on error returns the status,
// otherwise moves the value into `lhs`.
#define ASSIGN_OR_RETURN(lhs, rexpr)                                       \
  ASSIGN_OR_RETURN_IMPL_(                                                  \
      HRNET_STATUS_CONCAT_(_hrnet_statusor_, __LINE__), lhs, rexpr)

#endif  // HRNET_STATUS_MACROS_H_
