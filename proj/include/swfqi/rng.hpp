// Copyright 2026 The swfqi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>

namespace swfqi {

/// Purpose tags for random streams. The numeric values are part of the
/// reproducibility contract: changing one changes every downstream draw.
enum class Stream : std::uint64_t {
  kGarnetSuccessors = 1,
  kGarnetProbabilities = 2,
  kGarnetRewards = 3,
  kBehaviorPolicy = 4,
  kDataset = 5,
  kFeatures = 6,
  kWeightNoise = 7,
  kDirections = 8,
  kInitialization = 9,
  kPerturbation = 10,
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Counter-based generator: draw i of a stream is mix64(key + (i+1)*φ) with
/// φ = 0x9E3779B97F4A7C15, which is exactly the SplitMix64 sequence started
/// at `key`. The key is derived from (seed, purpose, substream) so that any
/// stream can be reconstructed without replaying the others.
///
/// The continuous transforms are implemented here rather than taken from
/// <random> because the standard distributions are not specified bit-for-bit.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream purpose, std::uint64_t substream = 0);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n); n > 0. Unbiased (Lemire rejection).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  /// Exponential with unit rate.
  double exponential();

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace swfqi
