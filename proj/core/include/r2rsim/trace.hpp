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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "r2rsim/time.hpp"

namespace r2rsim
{

enum class TraceKind : std::uint8_t
{
  Publish,
  DdsDeliver,
  Sample,
  ChannelOffer,
  ChannelDrop,
  QosDrop,
  TaskWake,
  CallbackStart,
  CallbackEnd,
  ThreadSwitch,
};

std::string_view to_string(TraceKind kind) noexcept;
std::optional<TraceKind> parse_trace_kind(std::string_view text) noexcept;

inline constexpr std::int32_t kNoId = -1;

struct TraceEvent
{
  SimTime time{};
  TraceKind kind = TraceKind::Publish;
  std::int32_t topic = kNoId;
  std::int64_t seq = -1;
  std::int32_t task = kNoId;
  std::int32_t thread = kNoId;
};

/// Metadata for a task id appearing in the trace: which node it lives in and
/// which event source (topic or timer) feeds it.
struct TaskInfo
{
  std::string name;
  std::string node;
  std::int32_t source = kNoId;
};

struct ThreadSummary
{
  std::string name;
  Duration executed{0};
  Duration overhead{0};
  std::uint64_t dispatches = 0;
  std::uint64_t preemptions = 0;
};

/// Append-only record of everything that happened in one run.
class Trace
{
public:
  std::int32_t add_topic(std::string name);
  std::int32_t add_task(TaskInfo info);
  std::int32_t add_thread(std::string name);

  /// Throws std::logic_error if `ev` is earlier than the last recorded event.
  void record(const TraceEvent & ev);

  void set_thread_summaries(std::vector<ThreadSummary> summaries);

  const std::vector<TraceEvent> & events() const noexcept { return events_; }
  const std::vector<std::string> & topics() const noexcept { return topics_; }
  const std::vector<TaskInfo> & tasks() const noexcept { return tasks_; }
  const std::vector<std::string> & threads() const noexcept { return threads_; }
  const std::vector<ThreadSummary> & thread_summaries() const noexcept { return summaries_; }

  std::optional<std::int32_t> find_topic(std::string_view name) const;

  /// CSV with header `time_ns,kind,topic,seq,task,thread`; ids are written as
  /// names, absent fields as empty cells.
  void write_csv(std::ostream & out) const;
  void write_thread_csv(std::ostream & out) const;

private:
  std::vector<TraceEvent> events_;
  std::vector<std::string> topics_;
  std::vector<TaskInfo> tasks_;
  std::vector<std::string> threads_;
  std::vector<ThreadSummary> summaries_;
};

}  // namespace r2rsim
