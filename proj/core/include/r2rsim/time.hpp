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

#include <chrono>
#include <cstdint>

namespace r2rsim
{

/// Virtual clock of the simulation. Time zero is the start of a run and all
/// arithmetic is exact integer nanoseconds.
struct SimClock
{
  using rep = std::int64_t;
  using period = std::nano;
  using duration = std::chrono::duration<rep, period>;
  using time_point = std::chrono::time_point<SimClock>;
  static constexpr bool is_steady = true;
};

using Duration = SimClock::duration;
using SimTime = SimClock::time_point;

inline constexpr SimTime kSimStart{};

constexpr std::int64_t to_ns(Duration d) noexcept { return d.count(); }
constexpr std::int64_t to_ns(SimTime t) noexcept { return t.time_since_epoch().count(); }
constexpr SimTime at_ns(std::int64_t ns) noexcept { return SimTime{Duration{ns}}; }

}  // namespace r2rsim
