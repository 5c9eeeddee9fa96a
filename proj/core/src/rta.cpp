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

#include "r2rsim/rta.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace r2rsim
{

namespace
{

std::int64_t ceil_div(std::int64_t num, std::int64_t den)
{
  return (num + den - 1) / den;
}

void check_task(const RtTask & t)
{
  if (t.wcet <= Duration{0} || t.period <= Duration{0}) {
    throw std::invalid_argument("task '" + t.id + "' needs positive execution time and period");
  }
}

}  // namespace

const RtaEntry * RtaResult::find(std::string_view id) const
{
  for (const auto & e : entries) {
    if (e.task.id == id) {
      return &e;
    }
  }
  return nullptr;
}

std::vector<std::size_t> rm_order(const std::vector<RtTask> & tasks)
{
  std::vector<std::size_t> order(tasks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return tasks[a].period < tasks[b].period;
    });
  return order;
}

std::vector<RtTask> rm_assign(std::vector<RtTask> tasks, int highest)
{
  int priority = highest;
  for (auto i : rm_order(tasks)) {
    tasks[i].priority = priority--;
  }
  return tasks;
}

std::vector<RtTask> rm_assign(std::vector<RtTask> tasks)
{
  const int highest = static_cast<int>(tasks.size());
  return rm_assign(std::move(tasks), highest);
}

ResponseTime response_time(
  const RtTask & task, const std::vector<RtTask> & higher_priority, std::int64_t divergence_factor)
{
  check_task(task);
  const std::int64_t bound = divergence_factor * task.period.count();
  ResponseTime out;
  std::int64_t r = task.wcet.count();
  for (;;) {
    ++out.iterations;
    std::int64_t next = task.wcet.count();
    for (const auto & hp : higher_priority) {
      check_task(hp);
      next += ceil_div(r, hp.period.count()) * hp.wcet.count();
    }
    if (next == r) {
      out.value = Duration{r};
      out.converged = true;
      return out;
    }
    r = next;
    if (r > bound) {
      out.value = Duration{r};
      return out;
    }
  }
}

double utilization(const std::vector<RtTask> & tasks)
{
  double u = 0.0;
  for (const auto & t : tasks) {
    u += static_cast<double>(t.wcet.count()) / static_cast<double>(t.period.count());
  }
  return u;
}

std::optional<std::size_t> dimension_channel(const RtTask & task, const ResponseTime & response)
{
  if (!response.converged) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(ceil_div(response.value.count(), task.period.count()));
}

RtaResult analyze(const std::vector<RtTask> & tasks, std::int64_t divergence_factor)
{
  std::set<int> priorities;
  for (const auto & t : tasks) {
    check_task(t);
    if (!priorities.insert(t.priority).second) {
      throw std::invalid_argument("priority " + std::to_string(t.priority) + " is used twice");
    }
  }
  RtaResult result;
  result.utilization = utilization(tasks);
  for (const auto & t : tasks) {
    std::vector<RtTask> hp;
    std::copy_if(tasks.begin(), tasks.end(), std::back_inserter(hp), [&](const RtTask & o) {
        return o.priority > t.priority;
      });
    RtaEntry e{t, response_time(t, hp, divergence_factor), false, std::nullopt};
    e.schedulable = e.response.converged && e.response.value <= t.effective_deadline();
    e.channel_capacity = dimension_channel(t, e.response);
    result.schedulable = result.schedulable && e.schedulable;
    result.entries.push_back(std::move(e));
  }
  return result;
}

}  // namespace r2rsim
