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

#ifndef HRNET_AUTODIFF_CHECKPOINT_H_
#define HRNET_AUTODIFF_CHECKPOINT_H_

#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "hrnet/autodiff/tensor.h"
#include "hrnet/key_value.h"

namespace hrnet::ad {

// Binary checkpoint layout (little-endian):
//   "HRNCKPT1"
//   u32 length + bytes: model kind
//   u32 length + bytes: metadata (KeyValueBlock text)
//   u32 tensor count, then per tensor:
//     u32 length + bytes name, u32 rank, rank x i32 dims, raw float64 values
struct Checkpoint {
  std::string kind;
  KeyValueBlock metadata;
  ParameterSet params;
};

std::string SerializeCheckpoint(const Checkpoint& checkpoint);
absl::StatusOr<Checkpoint> DeserializeCheckpoint(const std::string& bytes);

absl::Status SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path);
absl::StatusOr<Checkpoint> LoadCheckpoint(const std::string& path);

}  // namespace hrnet::ad

#endif  // HRNET_AUTODIFF_CHECKPOINT_H_
