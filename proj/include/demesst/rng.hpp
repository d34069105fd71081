// Copyright 2026 The demesst Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// Counter-based random streams keyed by (run seed, target id, sample
/// index). Every draw is a pure function of that triple plus a draw
/// counter, so concurrent workers need no shared state and any
/// partition of the sample range reproduces the same values.

#include <cstdint>
#include <string>

#include "demesst/core.hpp"

namespace demesst {
namespace rng {

/// Weyl increment of the splitmix64 sequence.
inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

/// Number of draws reserved per sample index; streams refuse to run
/// past their block so neighboring samples can never overlap.
inline constexpr std::uint64_t kDrawBlock = 1ull << 16;

/// splitmix64 output stage: a bijective 64-bit finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/// Derives the per-target stream key from the run seed and the
/// decomposition's target id. Distinct targets sampled under one run
/// seed get statistically independent streams.
inline std::uint64_t stream_key(std::uint64_t run_seed,
                                const std::string& target_id) {
  return mix64(fnv1a64(target_id) ^ mix64(run_seed ^ kGamma));
}

/// A bounded counter stream: draw d yields mix64(key + kGamma*(base+d)).
/// Copyable, no heap, no shared state.
class Stream {
 public:
  Stream(std::uint64_t key, std::uint64_t counter_base, std::uint64_t budget)
      : key_(key), counter_(counter_base), end_(counter_base + budget) {}

  std::uint64_t next() {
    if (counter_ == end_)
      throw validation_error("random stream exhausted its draw block");
    return mix64(key_ + kGamma * ++counter_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  std::uint64_t end_ = 0;
};

/// The draw stream owned by one sample: a disjoint kDrawBlock-sized
/// counter range, positioned purely by the sample index.
inline Stream sample_stream(std::uint64_t key, std::uint64_t sample_index) {
  return Stream(key, sample_index * kDrawBlock, kDrawBlock);
}

/// A free-running stream for uses that are not tied to a sample index
/// (for example scrambling an auxiliary test state).
inline Stream free_stream(std::uint64_t seed) {
  return Stream(mix64(seed ^ kGamma), 0,
                ~static_cast<std::uint64_t>(0));
}

}  // namespace rng
}  // namespace demesst
