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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "r2rsim/os_scheduler.hpp"
#include "r2rsim/ros_model.hpp"
#include "r2rsim/time.hpp"

namespace r2rsim
{

class Executor;
class TaskTable;

enum class TaskState : std::uint8_t { Idle, Ready, Executing, Waiting };

/// Receives callback boundaries from polled tasks.
class ExecutionHooks
{
public:
  virtual ~ExecutionHooks() = default;
  virtual void callback_start(TaskId task, const EntityEvent & ev, SimTime now) = 0;
  virtual void callback_end(TaskId task, const EntityEvent & ev, SimTime now) = 0;
};

/// Schedulable unit of callback work. A poll is advanced one callback
/// segment at a time so that the hosting thread can be preempted between
/// and during segments.
class AsyncTask
{
public:
  explicit AsyncTask(std::string name) : name_(std::move(name)) {}
  virtual ~AsyncTask() = default;

  /// Continues the current poll. Returns the length of the next segment, or
  /// nullopt once the poll has returned Pending.
  virtual std::optional<Duration> poll_step(SimTime now, TaskTable & tasks, ExecutionHooks & hooks) = 0;

  const std::string & name() const noexcept { return name_; }
  TaskId id() const noexcept { return id_; }

  TaskState state = TaskState::Idle;
  bool queued = false;    // present in some ready structure
  bool notified = false;  // woken while executing
  bool active = false;    // moved past the local executor's incoming vector
  Executor * owner = nullptr;
  std::optional<TaskId> group;

private:
  friend class TaskTable;
  std::string name_;
  TaskId id_ = 0;
};

/// `subscription.for_each(callback)`: each poll runs the callback for every
/// event currently in the channel, then waits on the channel again.
class ChannelTask : public AsyncTask
{
public:
  ChannelTask(std::string name, EventChannel & channel, Duration demand)
  : AsyncTask(std::move(name)), channel_(channel), demand_(demand) {}

  std::optional<Duration> poll_step(SimTime now, TaskTable & tasks, ExecutionHooks & hooks) override;

  std::uint64_t callbacks() const noexcept { return callbacks_; }

private:
  EventChannel & channel_;
  Duration demand_;
  std::optional<EntityEvent> current_;
  std::uint64_t callbacks_ = 0;
};

/// Task that does `demand` of work per poll and wakes itself before
/// returning Pending, so it is always ready again.
class BusyTask : public AsyncTask
{
public:
  BusyTask(std::string name, TopicId source, Duration demand)
  : AsyncTask(std::move(name)), source_(source), demand_(demand) {}

  std::optional<Duration> poll_step(SimTime now, TaskTable & tasks, ExecutionHooks & hooks) override;

  std::uint64_t polls() const noexcept { return polls_; }

private:
  TopicId source_;
  Duration demand_;
  bool running_ = false;
  std::uint64_t polls_ = 0;
};

/// Several futures combined with join!: scheduled as one task, and each poll
/// visits the members that were woken, in join order.
class JoinTask : public AsyncTask
{
public:
  JoinTask(std::string name, std::vector<TaskId> members);

  std::optional<Duration> poll_step(SimTime now, TaskTable & tasks, ExecutionHooks & hooks) override;

  void mark_member_ready(TaskId member);
  std::vector<TaskId> ready_members() const;
  const std::vector<TaskId> & members() const noexcept { return members_; }

private:
  std::vector<TaskId> members_;
  std::vector<bool> ready_;
  std::size_t cursor_ = 0;
  bool in_poll_ = false;
  bool member_mid_poll_ = false;
};

/// Callback invoked synchronously by an rclcpp-style executor. It has a task
/// id for tracing but is never polled.
class DirectCallback : public AsyncTask
{
public:
  using AsyncTask::AsyncTask;
  std::optional<Duration> poll_step(SimTime, TaskTable &, ExecutionHooks &) override
  {
    return std::nullopt;
  }
};

/// Owns every task of a simulation and routes wake-ups to the owning
/// executor (through the join group for grouped tasks).
class TaskTable
{
public:
  TaskId add(std::unique_ptr<AsyncTask> task);

  /// Creates a join group over `members` and returns its id. Members must not
  /// be spawned on an executor themselves.
  TaskId join(std::string name, std::vector<TaskId> members);

  AsyncTask & operator[](TaskId id) { return *tasks_.at(id); }
  const AsyncTask & operator[](TaskId id) const { return *tasks_.at(id); }
  std::size_t size() const noexcept { return tasks_.size(); }

  template<typename T>
  T & get(TaskId id) { return dynamic_cast<T &>(*tasks_.at(id)); }

  void wake(TaskId id, std::optional<ThreadId> from = std::nullopt);

private:
  std::vector<std::unique_ptr<AsyncTask>> tasks_;
};

}  // namespace r2rsim
