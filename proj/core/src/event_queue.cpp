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

#include "r2rsim/event_queue.hpp"

#include <fmt/format.h>

namespace r2rsim
{

std::string_view to_string(EventKind kind) noexcept
{
  switch (kind) {
    case EventKind::TimerFire: return "timer-fire";
    case EventKind::MessageArrival: return "message-arrival";
    case EventKind::QuantumExpiry: return "thread-quantum-expiry";
    case EventKind::WorkCompletion: return "callback-completion";
    case EventKind::SamplerWake: return "sampler-wake";
  }
  return "unknown";
}

std::uint64_t EventQueue::schedule(SimEvent ev)
{
  if (ev.at < now_) {
    throw SchedulingInPast(fmt::format(
        "{} event scheduled at {} ns, clock is at {} ns",
        to_string(ev.kind), to_ns(ev.at), to_ns(now_)));
  }
  ev.seq = next_seq_++;
  heap_.push(ev);
  return ev.seq;
}

std::uint64_t EventQueue::schedule(
  SimTime at, EventKind kind, std::uint32_t target, std::uint64_t token)
{
  return schedule(SimEvent{at, 0, kind, target, token});
}

std::optional<SimEvent> EventQueue::advance()
{
  if (heap_.empty()) {
    return std::nullopt;
  }
  SimEvent ev = heap_.top();
  heap_.pop();
  now_ = ev.at;
  ++consumed_;
  return ev;
}

const SimEvent * EventQueue::peek() const
{
  return heap_.empty() ? nullptr : &heap_.top();
}

}  // namespace r2rsim
