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
#include <optional>
#include <queue>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "r2rsim/time.hpp"

namespace r2rsim
{

enum class EventKind : std::uint8_t
{
  TimerFire,
  MessageArrival,
  QuantumExpiry,
  WorkCompletion,
  SamplerWake,
};

std::string_view to_string(EventKind kind) noexcept;

struct SimEvent
{
  SimTime at{};
  std::uint64_t seq = 0;  // assigned by EventQueue::schedule
  EventKind kind = EventKind::TimerFire;
  std::uint32_t target = 0;
  // Generation stamp; handlers compare it against the target's current
  // generation to discard events that were superseded after scheduling.
  std::uint64_t token = 0;
};

/// Raised when a component tries to schedule an event before the current
/// clock. This always indicates a bug in the simulator, never bad input.
class SchedulingInPast : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Time-ordered queue of future events. Pops in (at, seq) order, so events
/// scheduled for the same instant come out in the order they were scheduled.
class EventQueue
{
public:
  /// Returns the sequence number assigned to the event.
  std::uint64_t schedule(SimEvent ev);
  std::uint64_t schedule(SimTime at, EventKind kind, std::uint32_t target, std::uint64_t token = 0);

  /// Pops the earliest event and moves the clock to it. nullopt means the
  /// run is complete.
  std::optional<SimEvent> advance();

  const SimEvent * peek() const;

  SimTime now() const noexcept { return now_; }
  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  std::uint64_t scheduled_count() const noexcept { return next_seq_; }
  std::uint64_t consumed_count() const noexcept { return consumed_; }

private:
  struct Later
  {
    bool operator()(const SimEvent & a, const SimEvent & b) const noexcept
    {
      if (a.at != b.at) {
        return a.at > b.at;
      }
      return a.seq > b.seq;
    }
  };

  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
  SimTime now_ = kSimStart;
  std::uint64_t next_seq_ = 0;
  std::uint64_t consumed_ = 0;
};

}  // namespace r2rsim
