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

#include "r2rsim/trace.hpp"

#include <array>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace r2rsim
{

namespace
{
constexpr std::array<std::string_view, 10> kKindNames{
  "publish", "dds-deliver", "sample", "channel-offer", "channel-drop",
  "qos-drop", "task-wake", "callback-start", "callback-end", "thread-switch",
};

std::string_view name_or_empty(const std::vector<std::string> & names, std::int32_t id)
{
  if (id < 0 || static_cast<std::size_t>(id) >= names.size()) {
    return {};
  }
  return names[static_cast<std::size_t>(id)];
}
}  // namespace

std::string_view to_string(TraceKind kind) noexcept
{
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<TraceKind> parse_trace_kind(std::string_view text) noexcept
{
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == text) {
      return static_cast<TraceKind>(i);
    }
  }
  return std::nullopt;
}

std::int32_t Trace::add_topic(std::string name)
{
  topics_.push_back(std::move(name));
  return static_cast<std::int32_t>(topics_.size() - 1);
}

std::int32_t Trace::add_task(TaskInfo info)
{
  tasks_.push_back(std::move(info));
  return static_cast<std::int32_t>(tasks_.size() - 1);
}

std::int32_t Trace::add_thread(std::string name)
{
  threads_.push_back(std::move(name));
  return static_cast<std::int32_t>(threads_.size() - 1);
}

void Trace::record(const TraceEvent & ev)
{
  if (!events_.empty() && ev.time < events_.back().time) {
    throw std::logic_error(fmt::format(
        "trace time went backwards: {} ns after {} ns", to_ns(ev.time),
        to_ns(events_.back().time)));
  }
  events_.push_back(ev);
}

void Trace::set_thread_summaries(std::vector<ThreadSummary> summaries)
{
  summaries_ = std::move(summaries);
}

std::optional<std::int32_t> Trace::find_topic(std::string_view name) const
{
  for (std::size_t i = 0; i < topics_.size(); ++i) {
    if (topics_[i] == name) {
      return static_cast<std::int32_t>(i);
    }
  }
  return std::nullopt;
}

void Trace::write_csv(std::ostream & out) const
{
  out << "time_ns,kind,topic,seq,task,thread\n";
  for (const auto & ev : events_) {
    std::string_view task;
    if (ev.task >= 0 && static_cast<std::size_t>(ev.task) < tasks_.size()) {
      task = tasks_[static_cast<std::size_t>(ev.task)].name;
    }
    fmt::print(out, "{},{},{},{},{},{}\n", to_ns(ev.time), to_string(ev.kind),
        name_or_empty(topics_, ev.topic),
        ev.seq >= 0 ? fmt::to_string(ev.seq) : std::string{},
        task, name_or_empty(threads_, ev.thread));
  }
}

void Trace::write_thread_csv(std::ostream & out) const
{
  out << "thread,executed_ns,overhead_ns,dispatches,preemptions\n";
  for (const auto & s : summaries_) {
    fmt::print(out, "{},{},{},{},{}\n", s.name, to_ns(s.executed), to_ns(s.overhead),
        s.dispatches, s.preemptions);
  }
}

}  // namespace r2rsim
