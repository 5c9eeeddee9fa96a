// Copyright 2026 The r2rsim Authors
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

#include <cstdint>

namespace r2rsim
{

/// SplitMix64 generator. The state is a 64-bit counter advanced by the golden
/// gamma 0x9E3779B97F4A7C15; each output is the counter passed through the
/// finalizer
///
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   z =  z ^ (z >> 31)
///
/// Only fixed-width integer arithmetic is involved, so the sequence for a given
/// seed is identical on every platform.
class Rng
{
public:
  explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

  std::uint64_t next() noexcept;

  /// Uniform-ish draw in [0, n) via the multiply-high reduction
  /// (next() * n) >> 64. Throws std::invalid_argument for n == 0.
  std::uint64_t next_below(std::uint64_t n);

  std::uint64_t state() const noexcept { return state_; }

private:
  std::uint64_t state_;
};

}  // namespace r2rsim
