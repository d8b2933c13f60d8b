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

#ifndef HRNET_GENERATE_H_
#define HRNET_GENERATE_H_

#include <cstdint>

#include "absl/status/statusor.h"
#include "hrnet/model.h"
#include "hrnet/rng.h"
#include "hrnet/trajectory.h"

namespace hrnet::generate {

struct GenConfig {
  int64_t count = 1000;
  int max_length = 20;
  uint64_t seed = 0;
  // Zero the previous cell's probability so consecutive visits differ.
  bool mask_current = true;
  int threads = 1;
};

// Draws one trajectory by the chain rule. The first visit never ends the
// sequence; later, end-of-sequence is sampled like any cell, and is forced
// when masking leaves no mass. Slots are restricted to >= the previous slot.
absl::StatusOr<Trajectory> SampleTrajectory(const model::Model& model,
                                            const GenConfig& config, Rng& rng);

// `count` samples, sample i drawn from DeriveSeed(seed, i), so the result
// does not depend on the thread count.
absl::StatusOr<Dataset> GenerateDataset(const model::Model& model,
                                        const GenConfig& config);

}  // namespace hrnet::generate

#endif  // HRNET_GENERATE_H_
