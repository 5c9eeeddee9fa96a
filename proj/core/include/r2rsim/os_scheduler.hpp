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
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "r2rsim/event_queue.hpp"
#include "r2rsim/rng.hpp"
#include "r2rsim/time.hpp"

namespace r2rsim
{

using ThreadId = std::uint32_t;
using CoreId = std::uint32_t;

enum class SchedPolicy : std::uint8_t
{
  Fifo,   // fixed-priority preemptive, FIFO within a level
  Other,  // best-effort round robin, below every Fifo thread
};

enum class ThreadState : std::uint8_t { Ready, Running, Blocked };

inline constexpr int kMinFifoPriority = 1;
inline constexpr int kMaxFifoPriority = 99;

/// Behaviour of a simulated thread.
class ThreadBody
{
public:
  virtual ~ThreadBody() = default;

  /// Called on the running thread whenever it has no execution segment in
  /// progress. Performs the thread's zero-time actions at `now` and returns
  /// the length of the next segment to execute, or nullopt to block.
  virtual std::optional<Duration> step(SimTime now) = 0;
};

struct ThreadConfig
{
  std::string name;
  SchedPolicy policy = SchedPolicy::Fifo;
  int priority = kMinFifoPriority;
  std::vector<CoreId> affinity;  // empty: any core
};

struct SchedulerConfig
{
  std::size_t cores = 1;
  Duration context_switch{0};
  Duration other_quantum = std::chrono::milliseconds(1);
  // Draw each Other-policy time slice from [quantum/2, 3*quantum/2).
  bool jitter_other_quantum = true;
};

struct ThreadStats
{
  Duration executed{0};
  Duration overhead{0};
  std::uint64_t dispatches = 0;
  std::uint64_t preemptions = 0;
};

/// Simulated OS scheduler over one or more cores. Fifo threads follow
/// SCHED_FIFO semantics: the highest-priority ready thread runs, a preempted
/// thread returns to the head of its level, a newly readied one to the tail.
/// Other threads share whatever is left round-robin.
///
/// Nothing is dispatched from inside make_ready(); the simulation calls
/// settle() after every event so that thread bodies never re-enter each other.
class OsScheduler
{
public:
  using SwitchObserver = std::function<void (SimTime, CoreId, std::optional<ThreadId>)>;

  OsScheduler(EventQueue & events, Rng & rng, SchedulerConfig config = {});

  OsScheduler(const OsScheduler &) = delete;
  OsScheduler & operator=(const OsScheduler &) = delete;

  /// New threads start Ready and take their first step when dispatched.
  ThreadId create_thread(ThreadConfig config, ThreadBody & body);

  /// Blocked -> Ready; no-op for Ready or Running threads.
  void make_ready(ThreadId id);

  /// Dispatches and steps threads until the system is stable at the current
  /// clock.
  void settle();

  /// Consumes WorkCompletion and QuantumExpiry events. Returns false for
  /// event kinds it does not own.
  bool handle(const SimEvent & ev);

  /// Thread whose body is currently executing a step, if any.
  std::optional<ThreadId> current() const noexcept { return current_; }

  std::optional<ThreadId> running_on(CoreId core) const;
  ThreadState state(ThreadId id) const { return threads_.at(id).state; }
  const ThreadConfig & config(ThreadId id) const { return threads_.at(id).config; }
  const ThreadStats & stats(ThreadId id) const { return threads_.at(id).stats; }
  std::size_t thread_count() const noexcept { return threads_.size(); }
  std::size_t core_count() const noexcept { return cores_.size(); }

  void set_switch_observer(SwitchObserver observer) { observer_ = std::move(observer); }

  /// Throws std::logic_error if a core idles next to an affine ready thread
  /// or a ready Fifo thread outranks the one running on a core it may use.
  void check_invariants() const;

private:
  struct ReadyKey
  {
    int effective_priority;
    std::int64_t order;
    ThreadId id;

    bool operator<(const ReadyKey & o) const noexcept
    {
      if (effective_priority != o.effective_priority) {
        return effective_priority > o.effective_priority;
      }
      return order < o.order;
    }
  };

  struct Thread
  {
    ThreadConfig config;
    ThreadBody * body = nullptr;
    ThreadState state = ThreadState::Ready;
    bool needs_step = true;
    Duration remaining{0};
    Duration switch_left{0};
    SimTime segment_start{};
    std::uint64_t generation = 0;
    std::optional<CoreId> core;
    ReadyKey key{};
    ThreadStats stats;
  };

  struct Core
  {
    std::optional<ThreadId> running;
    std::optional<ThreadId> last_ran;
    std::optional<ThreadId> reported;
  };

  int effective_priority(const Thread & t) const noexcept;
  bool affine(const Thread & t, CoreId core) const noexcept;
  std::optional<ThreadId> best_ready_for(CoreId core) const;
  void enqueue(ThreadId id, bool at_head);
  void dispatch(CoreId core, ThreadId id);
  void preempt(CoreId core, bool at_head);
  void account(Thread & t);
  void arm_segment(ThreadId id);
  void arm_quantum(ThreadId id);
  void run_step(CoreId core);

  EventQueue & events_;
  Rng & rng_;
  SchedulerConfig config_;
  std::vector<Thread> threads_;
  std::vector<Core> cores_;
  std::set<ReadyKey> ready_;
  std::int64_t head_order_ = 0;
  std::int64_t tail_order_ = 0;
  std::optional<ThreadId> current_;
  SwitchObserver observer_;
};

}  // namespace r2rsim
