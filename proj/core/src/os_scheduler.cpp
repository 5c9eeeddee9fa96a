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

#include "r2rsim/os_scheduler.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace r2rsim
{

namespace
{
// Upper bound on dispatch/step rounds at a single instant. Hitting it means
// some thread body keeps returning zero-length segments forever.
constexpr std::size_t kMaxSettleRounds = 1'000'000;
}  // namespace

OsScheduler::OsScheduler(EventQueue & events, Rng & rng, SchedulerConfig config)
: events_(events), rng_(rng), config_(config), cores_(std::max<std::size_t>(config.cores, 1))
{
}

ThreadId OsScheduler::create_thread(ThreadConfig config, ThreadBody & body)
{
  const auto id = static_cast<ThreadId>(threads_.size());
  Thread t;
  t.config = std::move(config);
  t.body = &body;
  threads_.push_back(std::move(t));
  enqueue(id, false);
  return id;
}

int OsScheduler::effective_priority(const Thread & t) const noexcept
{
  return t.config.policy == SchedPolicy::Fifo ? t.config.priority : 0;
}

bool OsScheduler::affine(const Thread & t, CoreId core) const noexcept
{
  const auto & aff = t.config.affinity;
  return aff.empty() || std::find(aff.begin(), aff.end(), core) != aff.end();
}

std::optional<ThreadId> OsScheduler::best_ready_for(CoreId core) const
{
  for (const auto & key : ready_) {
    if (affine(threads_[key.id], core)) {
      return key.id;
    }
  }
  return std::nullopt;
}

void OsScheduler::enqueue(ThreadId id, bool at_head)
{
  auto & t = threads_[id];
  t.state = ThreadState::Ready;
  t.key = ReadyKey{effective_priority(t), at_head ? --head_order_ : ++tail_order_, id};
  ready_.insert(t.key);
}

void OsScheduler::make_ready(ThreadId id)
{
  auto & t = threads_.at(id);
  if (t.state != ThreadState::Blocked) {
    return;
  }
  t.needs_step = true;
  enqueue(id, false);
}

void OsScheduler::account(Thread & t)
{
  const SimTime now = events_.now();
  Duration elapsed = now - t.segment_start;
  t.segment_start = now;
  const Duration in_switch = std::min(elapsed, t.switch_left);
  t.switch_left -= in_switch;
  t.stats.overhead += in_switch;
  elapsed -= in_switch;
  const Duration in_work = std::min(elapsed, t.remaining);
  t.remaining -= in_work;
  t.stats.executed += in_work;
}

void OsScheduler::arm_segment(ThreadId id)
{
  auto & t = threads_[id];
  const Duration left = t.switch_left + (t.needs_step ? Duration{0} : t.remaining);
  if (left > Duration{0}) {
    events_.schedule(events_.now() + left, EventKind::WorkCompletion, id, t.generation);
  }
}

void OsScheduler::arm_quantum(ThreadId id)
{
  const auto & t = threads_[id];
  Duration slice = config_.other_quantum;
  if (config_.jitter_other_quantum && slice.count() > 1) {
    const auto half = slice.count() / 2;
    slice = Duration{half + static_cast<std::int64_t>(
        rng_.next_below(static_cast<std::uint64_t>(slice.count())))};
  }
  events_.schedule(events_.now() + slice, EventKind::QuantumExpiry, id, t.generation);
}

void OsScheduler::dispatch(CoreId core, ThreadId id)
{
  auto & t = threads_[id];
  auto & c = cores_[core];
  ready_.erase(t.key);
  t.state = ThreadState::Running;
  t.core = core;
  t.segment_start = events_.now();
  ++t.generation;
  ++t.stats.dispatches;
  if (c.last_ran && *c.last_ran != id) {
    t.switch_left = config_.context_switch;
  }
  c.running = id;
  c.last_ran = id;
  arm_segment(id);
  if (t.config.policy == SchedPolicy::Other) {
    arm_quantum(id);
  }
}

void OsScheduler::preempt(CoreId core, bool at_head)
{
  auto & c = cores_[core];
  const ThreadId id = *c.running;
  auto & t = threads_[id];
  account(t);
  if (t.remaining == Duration{0}) {
    t.needs_step = true;
  }
  ++t.generation;
  ++t.stats.preemptions;
  t.core.reset();
  c.running.reset();
  enqueue(id, at_head);
}

void OsScheduler::run_step(CoreId core)
{
  auto & c = cores_[core];
  const ThreadId id = *c.running;
  auto & t = threads_[id];
  current_ = id;
  std::optional<Duration> next;
  try {
    next = t.body->step(events_.now());
  } catch (...) {
    current_.reset();
    throw;
  }
  current_.reset();
  // step() may have readied other threads but never moves this one.
  if (!next) {
    t.state = ThreadState::Blocked;
    t.core.reset();
    t.needs_step = true;
    t.remaining = Duration{0};
    ++t.generation;
    c.running.reset();
    return;
  }
  if (*next < Duration{0}) {
    throw std::logic_error(fmt::format("thread '{}' requested a negative segment", t.config.name));
  }
  t.remaining = *next;
  t.segment_start = events_.now();
  t.needs_step = (*next == Duration{0});
  if (!t.needs_step) {
    arm_segment(id);
  }
}

void OsScheduler::settle()
{
  std::size_t rounds = 0;
  bool progress = true;
  while (progress) {
    progress = false;
    for (CoreId core = 0; core < cores_.size(); ++core) {
      auto & c = cores_[core];
      if (c.running) {
        // A segment ending now finishes before anything can preempt it.
        auto & t = threads_[*c.running];
        if (!t.needs_step) {
          account(t);
          t.needs_step = t.switch_left == Duration{0} && t.remaining == Duration{0};
        }
        if (t.needs_step && t.switch_left == Duration{0}) {
          run_step(core);
          progress = true;
          continue;
        }
      }
      if (auto best = best_ready_for(core)) {
        if (!c.running ||
          effective_priority(threads_[*best]) > effective_priority(threads_[*c.running]))
        {
          if (c.running) {
            preempt(core, true);
          }
          dispatch(core, *best);
          progress = true;
        }
      }
      if (c.running) {
        const auto & t = threads_[*c.running];
        if (t.needs_step && t.switch_left == Duration{0}) {
          run_step(core);
          progress = true;
        }
      }
    }
    if (++rounds > kMaxSettleRounds) {
      throw std::logic_error(fmt::format(
          "scheduler failed to settle at {} ns; a thread keeps yielding zero-length work",
          to_ns(events_.now())));
    }
  }
  for (CoreId core = 0; core < cores_.size(); ++core) {
    auto & c = cores_[core];
    if (c.running != c.reported) {
      c.reported = c.running;
      if (observer_) {
        observer_(events_.now(), core, c.running);
      }
    }
  }
}

bool OsScheduler::handle(const SimEvent & ev)
{
  if (ev.kind != EventKind::WorkCompletion && ev.kind != EventKind::QuantumExpiry) {
    return false;
  }
  auto & t = threads_.at(ev.target);
  if (t.state != ThreadState::Running || t.generation != ev.token) {
    return true;  // superseded by a preemption or block
  }
  if (ev.kind == EventKind::WorkCompletion) {
    account(t);
    if (t.switch_left == Duration{0} && t.remaining == Duration{0}) {
      t.needs_step = true;
    }
    return true;
  }
  const CoreId core = *t.core;
  if (best_ready_for(core)) {
    preempt(core, false);
  } else {
    arm_quantum(ev.target);
  }
  return true;
}

std::optional<ThreadId> OsScheduler::running_on(CoreId core) const
{
  return cores_.at(core).running;
}

void OsScheduler::check_invariants() const
{
  for (CoreId core = 0; core < cores_.size(); ++core) {
    const auto best = best_ready_for(core);
    const auto & running = cores_[core].running;
    if (!running && best) {
      throw std::logic_error(fmt::format(
          "core {} idle while '{}' is ready", core, threads_[*best].config.name));
    }
    if (running && best &&
      effective_priority(threads_[*best]) > effective_priority(threads_[*running]))
    {
      throw std::logic_error(fmt::format(
          "'{}' runs on core {} while higher-priority '{}' is ready",
          threads_[*running].config.name, core, threads_[*best].config.name));
    }
  }
}

}  // namespace r2rsim
