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

#include "r2rsim/rng.hpp"

#include <stdexcept>

namespace r2rsim
{

std::uint64_t Rng::next() noexcept
{
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::next_below(std::uint64_t n)
{
  if (n == 0) {
    throw std::invalid_argument("next_below requires n >= 1");
  }
  __extension__ using Wide = unsigned __int128;
  const Wide wide = static_cast<Wide>(next()) * n;
  return static_cast<std::uint64_t>(wide >> 64);
}

}  // namespace r2rsim
