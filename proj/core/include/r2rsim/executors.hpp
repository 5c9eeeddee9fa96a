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
#include <deque>
#include <functional>
#include <list>
#include <optional>
#include <string_view>
#include <vector>

#include "r2rsim/os_scheduler.hpp"
#include "r2rsim/rng.hpp"
#include "r2rsim/ros_model.hpp"
#include "r2rsim/tasks.hpp"

namespace r2rsim
{

/// Unparks a simulated host or worker thread.
using Unparker = std::function<void (ThreadId)>;

class Executor
{
public:
  explicit Executor(TaskTable & tasks) : tasks_(tasks) {}
  virtual ~Executor() = default;

  Executor(const Executor &) = delete;
  Executor & operator=(const Executor &) = delete;

  virtual void spawn(TaskId id) = 0;
  /// `from` is the simulated thread performing the wake, if any.
  virtual void wake(TaskId id, std::optional<ThreadId> from) = 0;

  void set_unparker(Unparker unparker) { unpark_ = std::move(unparker); }

protected:
  void unpark(ThreadId thread) const
  {
    if (unpark_) {
      unpark_(thread);
    }
  }

  TaskTable & tasks_;
  Unparker unpark_;
};

/// futures::executor::LocalPool. Spawned tasks sit in the incoming vector
/// until the executor runs; then they join the active list and are queued
/// once. Every wake of an active task, including one that is executing,
/// appends it to the FIFO ready queue unless it is already there.
class LocalPoolExecutor : public Executor
{
public:
  using Executor::Executor;

  void set_host(ThreadId host) { host_ = host; }

  void spawn(TaskId id) override;
  void wake(TaskId id, std::optional<ThreadId> from) override;

  /// Moves incoming tasks to the active list and queues each of them.
  void drain_incoming();
  std::optional<TaskId> next_ready();
  void finish_poll(TaskId id);

  const std::deque<TaskId> & ready_queue() const noexcept { return ready_; }
  const std::vector<TaskId> & incoming() const noexcept { return incoming_; }
  const std::list<TaskId> & active() const noexcept { return active_; }

private:
  std::optional<ThreadId> host_;
  std::vector<TaskId> incoming_;
  std::list<TaskId> active_;
  std::deque<TaskId> ready_;
};

/// Polls until the ready queue is empty, in zero simulated time. Returns the
/// ids of the polled tasks in order.
std::vector<TaskId> run_until_stalled(
  LocalPoolExecutor & ex, TaskTable & tasks, ExecutionHooks & hooks, SimTime now = kSimStart);

/// futures::executor::ThreadPool: one shared FIFO ready queue consumed by N
/// workers. A task woken while it executes is polled again on the same
/// worker instead of being queued, which can starve other tasks.
class ThreadPoolExecutor : public Executor
{
public:
  using Executor::Executor;

  std::size_t add_worker(ThreadId thread);
  std::size_t worker_count() const noexcept { return workers_.size(); }

  void spawn(TaskId id) override;
  void wake(TaskId id, std::optional<ThreadId> from) override;

  std::optional<TaskId> next_ready();
  /// Returns true when the task must be polled again on the same worker.
  bool finish_poll(TaskId id);
  void park(std::size_t worker);

  const std::deque<TaskId> & ready_queue() const noexcept { return ready_; }

private:
  struct Worker
  {
    ThreadId thread;
    bool idle = false;
  };

  void notify_idle();

  std::vector<Worker> workers_;
  std::deque<TaskId> ready_;
};

/// Subset of the Tokio multi-threaded scheduler: per-worker LIFO slot used at
/// most `lifo_limit` times in a row, bounded per-worker local queues, a global
/// injection queue, and stealing half of a victim's local queue starting from
/// a random worker.
class TokioLikeExecutor : public Executor
{
public:
  enum class Source : std::uint8_t { Lifo, Local, Global, Steal };

  struct Pick
  {
    TaskId task;
    Source source;
  };

  struct Config
  {
    std::size_t lifo_limit = 3;
    std::size_t local_capacity = 256;
  };

  TokioLikeExecutor(TaskTable & tasks, Rng & rng, Config config);
  TokioLikeExecutor(TaskTable & tasks, Rng & rng) : TokioLikeExecutor(tasks, rng, Config{}) {}

  std::size_t add_worker(ThreadId thread);
  std::size_t worker_count() const noexcept { return workers_.size(); }

  void spawn(TaskId id) override;
  /// Wakes from one of this runtime's workers land in that worker's LIFO
  /// slot; all other wakes go to the global queue.
  void wake(TaskId id, std::optional<ThreadId> from) override;

  std::optional<Pick> pick_next(std::size_t worker);
  /// A task notified during its poll yields to the back of the local queue.
  void finish_poll(std::size_t worker, TaskId id);
  void park(std::size_t worker);

  std::optional<TaskId> lifo_slot(std::size_t worker) const { return workers_.at(worker).lifo; }
  const std::deque<TaskId> & local_queue(std::size_t worker) const { return workers_.at(worker).local; }
  const std::deque<TaskId> & global_queue() const noexcept { return global_; }
  std::size_t lifo_streak(std::size_t worker) const { return workers_.at(worker).lifo_streak; }

  /// Test access: place a task straight into a worker's local queue.
  void push_local(std::size_t worker, TaskId id);

private:
  struct Worker
  {
    ThreadId thread;
    std::optional<TaskId> lifo;
    std::deque<TaskId> local;
    std::size_t lifo_streak = 0;
    bool idle = false;
  };

  std::optional<std::size_t> worker_of(std::optional<ThreadId> thread) const;
  void mark_queued(TaskId id);
  void take(TaskId id);
  void notify_idle(std::optional<std::size_t> except);

  Rng & rng_;
  Config config_;
  std::vector<Worker> workers_;
  std::deque<TaskId> global_;
};

std::string_view to_string(TokioLikeExecutor::Source source) noexcept;

/// rclcpp single-threaded executor over one wait set: sample, then run every
/// ready callback, timers before subscriptions, registration order within a
/// kind. Each callback execution takes a single event.
class CppSingleThreadedExecutor
{
public:
  struct Callback
  {
    EntityId entity;
    TaskId task;
    Duration demand;
  };

  CppSingleThreadedExecutor(Node & node, WaitSet & ws) : node_(node), ws_(ws) {}

  void add_callback(Callback cb);
  const Callback & callback_for(EntityId entity) const;

  std::vector<EntityId> sample() const;

  /// One zero-time spin cycle. Returns executed callback ids in order.
  std::vector<TaskId> spin_some(ExecutionHooks & hooks, SimTime now = kSimStart);

  Node & node() noexcept { return node_; }
  WaitSet & wait_set() noexcept { return ws_; }

private:
  Node & node_;
  WaitSet & ws_;
  std::vector<Callback> callbacks_;
};

}  // namespace r2rsim
