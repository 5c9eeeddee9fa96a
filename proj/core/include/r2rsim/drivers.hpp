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
#include <optional>
#include <vector>

#include "r2rsim/activity.hpp"
#include "r2rsim/executors.hpp"
#include "r2rsim/tasks.hpp"

namespace r2rsim
{

/// Runs a LocalPool on its host thread. In RunUntilStalled mode the activity
/// finishes once the ready queue is empty; in Run mode it blocks instead.
class LocalPoolDriver : public Activity
{
public:
  enum class Mode : std::uint8_t { RunUntilStalled, Run };

  LocalPoolDriver(
    LocalPoolExecutor & ex, TaskTable & tasks, ExecutionHooks & hooks, Mode mode,
    Duration poll_cost = Duration{0})
  : ex_(ex), tasks_(tasks), hooks_(hooks), mode_(mode), poll_cost_(poll_cost) {}

  Step step(SimTime now) override;

private:
  LocalPoolExecutor & ex_;
  TaskTable & tasks_;
  ExecutionHooks & hooks_;
  Mode mode_;
  Duration poll_cost_;
  std::optional<TaskId> charged_;
  std::optional<TaskId> current_;
};

class PoolWorkerDriver : public Activity
{
public:
  PoolWorkerDriver(
    ThreadPoolExecutor & ex, std::size_t worker, TaskTable & tasks, ExecutionHooks & hooks,
    Duration poll_cost = Duration{0})
  : ex_(ex), worker_(worker), tasks_(tasks), hooks_(hooks), poll_cost_(poll_cost) {}

  Step step(SimTime now) override;

private:
  ThreadPoolExecutor & ex_;
  std::size_t worker_;
  TaskTable & tasks_;
  ExecutionHooks & hooks_;
  Duration poll_cost_;
  std::optional<TaskId> charged_;
  std::optional<TaskId> current_;
};

class TokioWorkerDriver : public Activity
{
public:
  TokioWorkerDriver(
    TokioLikeExecutor & ex, std::size_t worker, TaskTable & tasks, ExecutionHooks & hooks,
    Duration poll_cost = Duration{0})
  : ex_(ex), worker_(worker), tasks_(tasks), hooks_(hooks), poll_cost_(poll_cost) {}

  Step step(SimTime now) override;

  /// Sources of every pick this worker made, in order.
  const std::vector<TokioLikeExecutor::Source> & picks() const noexcept { return picks_; }

private:
  TokioLikeExecutor & ex_;
  std::size_t worker_;
  TaskTable & tasks_;
  ExecutionHooks & hooks_;
  Duration poll_cost_;
  std::optional<TaskId> charged_;
  std::optional<TaskId> current_;
  std::vector<TokioLikeExecutor::Source> picks_;
};

/// rclcpp spin loop on one thread: sample the wait set, execute each sampled
/// callback on one taken event, repeat; wait on the wait set when idle.
class CppExecutorDriver : public Activity
{
public:
  CppExecutorDriver(CppSingleThreadedExecutor & ex, ExecutionHooks & hooks)
  : ex_(ex), hooks_(hooks) {}

  void set_thread(ThreadId self) { self_ = self; }
  Step step(SimTime now) override;

private:
  struct Running
  {
    TaskId task;
    EntityEvent event;
  };

  CppSingleThreadedExecutor & ex_;
  ExecutionHooks & hooks_;
  ThreadId self_ = 0;
  std::vector<EntityId> pass_;
  std::size_t next_ = 0;
  std::optional<Running> running_;
};

}  // namespace r2rsim
