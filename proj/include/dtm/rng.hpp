/* Copyright 2026 The DTM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>

namespace dtm {

/// Portable deterministic generator: SplitMix64 expands the 64-bit seed into
/// xoshiro256** state. Integer ranges use rejection sampling, so identical
/// seeds produce identical streams on every platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;

  /// Uniform integer on [lo, hi], both ends inclusive. Requires lo <= hi.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) noexcept;

  /// Uniform double on [0, 1) with 53 random bits.
  double uniform01() noexcept;

  /// Standard normal deviate (Box-Muller, one value per call). Bit-exactness
  /// across platforms depends on libm; the integer stream does not.
  double normal() noexcept;

  /// Child stream seeded from this stream's next output.
  Rng fork() noexcept { return Rng(next_u64()); }

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

}  // namespace dtm
