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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "r2rsim/time.hpp"

namespace r2rsim
{

/// Periodic task for uniprocessor fixed-priority analysis. Higher priority
/// values are more urgent.
struct RtTask
{
  std::string id;
  Duration wcet{0};
  Duration period{0};
  int priority = 0;
  std::optional<Duration> deadline;  // defaults to the period

  Duration effective_deadline() const noexcept { return deadline.value_or(period); }

  bool operator==(const RtTask &) const = default;
};

struct ResponseTime
{
  Duration value{0};  // last iterate when diverged
  bool converged = false;
  std::size_t iterations = 0;
};

struct RtaEntry
{
  RtTask task;
  ResponseTime response;
  bool schedulable = false;
  std::optional<std::size_t> channel_capacity;  // nullopt: unbounded
};

struct RtaResult
{
  std::vector<RtaEntry> entries;  // input order
  bool schedulable = true;
  double utilization = 0.0;

  const RtaEntry * find(std::string_view id) const;
};

inline constexpr std::int64_t kDefaultDivergenceFactor = 10;

/// Indices of `tasks` from shortest to longest period; equal periods keep
/// declaration order.
std::vector<std::size_t> rm_order(const std::vector<RtTask> & tasks);

/// Rate-monotonic priorities `highest`, `highest - 1`, ... in RM order.
std::vector<RtTask> rm_assign(std::vector<RtTask> tasks, int highest);
std::vector<RtTask> rm_assign(std::vector<RtTask> tasks);

/// Least fixed point of R = C + sum over hp of ceil(R / T_j) * C_j starting
/// at R = C. Iteration stops as diverged once R exceeds factor * T.
ResponseTime response_time(
  const RtTask & task, const std::vector<RtTask> & higher_priority,
  std::int64_t divergence_factor = kDefaultDivergenceFactor);

double utilization(const std::vector<RtTask> & tasks);

/// ceil(R / T), or nullopt when R did not converge.
std::optional<std::size_t> dimension_channel(const RtTask & task, const ResponseTime & response);

/// Throws std::invalid_argument on duplicate priorities or non-positive
/// execution times and periods.
RtaResult analyze(
  const std::vector<RtTask> & tasks, std::int64_t divergence_factor = kDefaultDivergenceFactor);

}  // namespace r2rsim
