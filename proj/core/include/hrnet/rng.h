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

#ifndef HRNET_RNG_H_
#define HRNET_RNG_H_

#include <cstdint>
#include <limits>

#include "absl/strings/string_view.h"

namespace hrnet {

// Counter-based 64-bit generator. Output i is a keyed bijective mix of the
// counter, so streams are reproducible from (seed, position) alone and can be
// split cheaply by deriving new keys. Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = uint64_t;

  explicit Rng(uint64_t seed) : key_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform();
  // Uniform double in the open interval (0, 1).
  double UniformOpen();

  uint64_t seed() const { return key_; }
  uint64_t counter() const { return counter_; }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

// Derives an independent seed for a named sub-stream of `master`.
uint64_t DeriveSeed(uint64_t master, absl::string_view label);
// Derives the seed of item `index` within a sub-stream.
uint64_t DeriveSeed(uint64_t master, uint64_t index);

// Draws a seed from the operating system's entropy source.
uint64_t SeedFromEntropy();

}  // namespace hrnet

#endif  // HRNET_RNG_H_
