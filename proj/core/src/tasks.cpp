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

#include "r2rsim/tasks.hpp"

#include <algorithm>
#include <stdexcept>

#include "r2rsim/executors.hpp"

namespace r2rsim
{

std::optional<Duration> ChannelTask::poll_step(SimTime now, TaskTable &, ExecutionHooks & hooks)
{
  if (current_) {
    hooks.callback_end(id(), *current_, now);
    current_.reset();
  }
  current_ = channel_.take();
  if (!current_) {
    return std::nullopt;
  }
  ++callbacks_;
  hooks.callback_start(id(), *current_, now);
  return demand_;
}

std::optional<Duration> BusyTask::poll_step(SimTime now, TaskTable & tasks, ExecutionHooks & hooks)
{
  const EntityEvent activation{source_, static_cast<std::int64_t>(polls_)};
  if (!running_) {
    running_ = true;
    hooks.callback_start(id(), activation, now);
    return demand_;
  }
  running_ = false;
  ++polls_;
  hooks.callback_end(id(), activation, now);
  tasks.wake(id());
  return std::nullopt;
}

JoinTask::JoinTask(std::string name, std::vector<TaskId> members)
: AsyncTask(std::move(name)), members_(std::move(members)), ready_(members_.size(), false)
{
  if (members_.empty()) {
    throw std::invalid_argument("join group needs at least one member");
  }
}

void JoinTask::mark_member_ready(TaskId member)
{
  const auto it = std::find(members_.begin(), members_.end(), member);
  if (it == members_.end()) {
    throw std::invalid_argument("task is not a member of this join group");
  }
  ready_[static_cast<std::size_t>(it - members_.begin())] = true;
}

std::vector<TaskId> JoinTask::ready_members() const
{
  std::vector<TaskId> out;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (ready_[i]) {
      out.push_back(members_[i]);
    }
  }
  return out;
}

std::optional<Duration> JoinTask::poll_step(SimTime now, TaskTable & tasks, ExecutionHooks & hooks)
{
  if (!in_poll_) {
    in_poll_ = true;
    cursor_ = 0;
    member_mid_poll_ = false;
  }
  while (cursor_ < members_.size()) {
    if (member_mid_poll_ || ready_[cursor_]) {
      if (!member_mid_poll_) {
        ready_[cursor_] = false;
        member_mid_poll_ = true;
      }
      if (auto segment = tasks[members_[cursor_]].poll_step(now, tasks, hooks)) {
        return segment;
      }
      member_mid_poll_ = false;
    }
    ++cursor_;
  }
  in_poll_ = false;
  return std::nullopt;
}

TaskId TaskTable::add(std::unique_ptr<AsyncTask> task)
{
  const auto id = static_cast<TaskId>(tasks_.size());
  task->id_ = id;
  tasks_.push_back(std::move(task));
  return id;
}

TaskId TaskTable::join(std::string name, std::vector<TaskId> members)
{
  for (auto m : members) {
    if ((*this)[m].group) {
      throw std::invalid_argument("task already belongs to a join group");
    }
  }
  const TaskId group = add(std::make_unique<JoinTask>(std::move(name), members));
  for (auto m : members) {
    (*this)[m].group = group;
  }
  return group;
}

void TaskTable::wake(TaskId id, std::optional<ThreadId> from)
{
  auto * task = tasks_.at(id).get();
  if (task->group) {
    auto & group = get<JoinTask>(*task->group);
    group.mark_member_ready(id);
    task = &group;
  }
  if (!task->owner) {
    throw std::logic_error("woken task '" + task->name() + "' is not spawned on an executor");
  }
  task->owner->wake(task->id(), from);
}

}  // namespace r2rsim
