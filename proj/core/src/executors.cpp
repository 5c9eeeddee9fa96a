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

#include "r2rsim/executors.hpp"

#include <algorithm>
#include <stdexcept>

namespace r2rsim
{

namespace
{

constexpr std::size_t kStallGuard = 1'000'000;

}  // namespace

// ---------------------------------------------------------------- LocalPool

void LocalPoolExecutor::spawn(TaskId id)
{
  auto & task = tasks_[id];
  task.owner = this;
  task.state = TaskState::Idle;
  incoming_.push_back(id);
  if (host_) {
    unpark(*host_);
  }
}

void LocalPoolExecutor::wake(TaskId id, std::optional<ThreadId>)
{
  auto & task = tasks_[id];
  if (!task.active || task.queued) {
    return;
  }
  task.queued = true;
  if (task.state != TaskState::Executing) {
    task.state = TaskState::Ready;
  }
  ready_.push_back(id);
  if (host_) {
    unpark(*host_);
  }
}

void LocalPoolExecutor::drain_incoming()
{
  for (auto id : incoming_) {
    auto & task = tasks_[id];
    task.active = true;
    active_.push_back(id);
    if (!task.queued) {
      task.queued = true;
      task.state = TaskState::Ready;
      ready_.push_back(id);
    }
  }
  incoming_.clear();
}

std::optional<TaskId> LocalPoolExecutor::next_ready()
{
  if (ready_.empty()) {
    return std::nullopt;
  }
  const TaskId id = ready_.front();
  ready_.pop_front();
  auto & task = tasks_[id];
  task.queued = false;
  task.state = TaskState::Executing;
  return id;
}

void LocalPoolExecutor::finish_poll(TaskId id)
{
  auto & task = tasks_[id];
  task.state = task.queued ? TaskState::Ready : TaskState::Waiting;
}

std::vector<TaskId> run_until_stalled(
  LocalPoolExecutor & ex, TaskTable & tasks, ExecutionHooks & hooks, SimTime now)
{
  std::vector<TaskId> polled;
  for (;;) {
    ex.drain_incoming();
    const auto id = ex.next_ready();
    if (!id) {
      return polled;
    }
    if (polled.size() >= kStallGuard) {
      throw std::logic_error("run_until_stalled does not stall");
    }
    while (tasks[*id].poll_step(now, tasks, hooks)) {
    }
    ex.finish_poll(*id);
    polled.push_back(*id);
  }
}

// --------------------------------------------------------------- ThreadPool

std::size_t ThreadPoolExecutor::add_worker(ThreadId thread)
{
  workers_.push_back(Worker{thread});
  return workers_.size() - 1;
}

void ThreadPoolExecutor::spawn(TaskId id)
{
  tasks_[id].owner = this;
  tasks_[id].state = TaskState::Idle;
  wake(id, std::nullopt);
}

void ThreadPoolExecutor::wake(TaskId id, std::optional<ThreadId>)
{
  auto & task = tasks_[id];
  if (task.state == TaskState::Executing) {
    task.notified = true;
    return;
  }
  if (task.queued) {
    return;
  }
  task.queued = true;
  task.state = TaskState::Ready;
  ready_.push_back(id);
  notify_idle();
}

std::optional<TaskId> ThreadPoolExecutor::next_ready()
{
  if (ready_.empty()) {
    return std::nullopt;
  }
  const TaskId id = ready_.front();
  ready_.pop_front();
  auto & task = tasks_[id];
  task.queued = false;
  task.notified = false;
  task.state = TaskState::Executing;
  return id;
}

bool ThreadPoolExecutor::finish_poll(TaskId id)
{
  auto & task = tasks_[id];
  if (task.notified) {
    task.notified = false;
    return true;
  }
  task.state = TaskState::Waiting;
  return false;
}

void ThreadPoolExecutor::park(std::size_t worker)
{
  workers_.at(worker).idle = true;
}

void ThreadPoolExecutor::notify_idle()
{
  for (auto & w : workers_) {
    if (w.idle) {
      w.idle = false;
      unpark(w.thread);
      return;
    }
  }
}

// ---------------------------------------------------------------- TokioLike

TokioLikeExecutor::TokioLikeExecutor(TaskTable & tasks, Rng & rng, Config config)
: Executor(tasks), rng_(rng), config_(config)
{
  if (config_.local_capacity == 0) {
    throw std::invalid_argument("local queue capacity must be positive");
  }
}

std::size_t TokioLikeExecutor::add_worker(ThreadId thread)
{
  workers_.push_back(Worker{thread, std::nullopt, {}, 0, false});
  return workers_.size() - 1;
}

std::optional<std::size_t> TokioLikeExecutor::worker_of(std::optional<ThreadId> thread) const
{
  if (!thread) {
    return std::nullopt;
  }
  for (std::size_t i = 0; i < workers_.size(); ++i) {
    if (workers_[i].thread == *thread) {
      return i;
    }
  }
  return std::nullopt;
}

void TokioLikeExecutor::mark_queued(TaskId id)
{
  auto & task = tasks_[id];
  task.queued = true;
  task.state = TaskState::Ready;
}

void TokioLikeExecutor::take(TaskId id)
{
  auto & task = tasks_[id];
  task.queued = false;
  task.notified = false;
  task.state = TaskState::Executing;
}

void TokioLikeExecutor::spawn(TaskId id)
{
  tasks_[id].owner = this;
  tasks_[id].state = TaskState::Idle;
  mark_queued(id);
  global_.push_back(id);
  notify_idle(std::nullopt);
}

void TokioLikeExecutor::push_local(std::size_t worker, TaskId id)
{
  mark_queued(id);
  auto & w = workers_.at(worker);
  if (w.local.size() >= config_.local_capacity) {
    global_.push_back(id);
  } else {
    w.local.push_back(id);
  }
}

void TokioLikeExecutor::wake(TaskId id, std::optional<ThreadId> from)
{
  auto & task = tasks_[id];
  if (task.state == TaskState::Executing) {
    task.notified = true;
    return;
  }
  if (task.queued) {
    return;
  }
  const auto worker = worker_of(from);
  if (!worker) {
    mark_queued(id);
    global_.push_back(id);
    notify_idle(std::nullopt);
    return;
  }
  auto & w = workers_[*worker];
  if (w.lifo) {
    push_local(*worker, *w.lifo);
  }
  mark_queued(id);
  w.lifo = id;
  notify_idle(worker);
}

std::optional<TokioLikeExecutor::Pick> TokioLikeExecutor::pick_next(std::size_t worker)
{
  auto & w = workers_.at(worker);
  if (w.lifo) {
    if (w.lifo_streak < config_.lifo_limit) {
      const TaskId id = *w.lifo;
      w.lifo.reset();
      ++w.lifo_streak;
      take(id);
      return Pick{id, Source::Lifo};
    }
    const TaskId id = *w.lifo;
    w.lifo.reset();
    push_local(worker, id);
  }
  w.lifo_streak = 0;

  if (!w.local.empty()) {
    const TaskId id = w.local.front();
    w.local.pop_front();
    take(id);
    return Pick{id, Source::Local};
  }
  if (!global_.empty()) {
    const TaskId id = global_.front();
    global_.pop_front();
    take(id);
    return Pick{id, Source::Global};
  }
  const std::size_t n = workers_.size();
  if (n < 2) {
    return std::nullopt;
  }
  const std::size_t start = static_cast<std::size_t>(rng_.next_below(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t v = (start + i) % n;
    if (v == worker || workers_[v].local.empty()) {
      continue;
    }
    auto & victim = workers_[v].local;
    const std::size_t count = (victim.size() + 1) / 2;
    std::vector<TaskId> stolen(victim.begin(), victim.begin() + static_cast<std::ptrdiff_t>(count));
    victim.erase(victim.begin(), victim.begin() + static_cast<std::ptrdiff_t>(count));
    for (std::size_t k = 1; k < stolen.size(); ++k) {
      push_local(worker, stolen[k]);
    }
    take(stolen.front());
    return Pick{stolen.front(), Source::Steal};
  }
  return std::nullopt;
}

void TokioLikeExecutor::finish_poll(std::size_t worker, TaskId id)
{
  auto & task = tasks_[id];
  if (task.notified) {
    task.notified = false;
    push_local(worker, id);
    return;
  }
  task.state = TaskState::Waiting;
}

void TokioLikeExecutor::park(std::size_t worker)
{
  workers_.at(worker).idle = true;
}

void TokioLikeExecutor::notify_idle(std::optional<std::size_t> except)
{
  for (std::size_t i = 0; i < workers_.size(); ++i) {
    if (workers_[i].idle && (!except || i != *except)) {
      workers_[i].idle = false;
      unpark(workers_[i].thread);
      return;
    }
  }
}

std::string_view to_string(TokioLikeExecutor::Source source) noexcept
{
  switch (source) {
    case TokioLikeExecutor::Source::Lifo: return "lifo";
    case TokioLikeExecutor::Source::Local: return "local";
    case TokioLikeExecutor::Source::Global: return "global";
    case TokioLikeExecutor::Source::Steal: return "steal";
  }
  return "?";
}

// ------------------------------------------------------- rclcpp single-thread

void CppSingleThreadedExecutor::add_callback(Callback cb)
{
  if (std::find(ws_.members.begin(), ws_.members.end(), cb.entity) == ws_.members.end()) {
    throw std::invalid_argument("callback entity is not in the executor's wait set");
  }
  callbacks_.push_back(cb);
}

const CppSingleThreadedExecutor::Callback & CppSingleThreadedExecutor::callback_for(EntityId entity) const
{
  for (const auto & cb : callbacks_) {
    if (cb.entity == entity) {
      return cb;
    }
  }
  throw std::out_of_range("no callback registered for entity");
}

std::vector<EntityId> CppSingleThreadedExecutor::sample() const
{
  return node_.ready_entities(ws_, ReadyOrder::TimersFirst);
}

std::vector<TaskId> CppSingleThreadedExecutor::spin_some(ExecutionHooks & hooks, SimTime now)
{
  std::vector<TaskId> executed;
  for (const auto entity : sample()) {
    const auto ev = node_.take(entity, now);
    if (!ev) {
      continue;
    }
    const auto & cb = callback_for(entity);
    hooks.callback_start(cb.task, *ev, now);
    hooks.callback_end(cb.task, *ev, now);
    executed.push_back(cb.task);
  }
  return executed;
}

}  // namespace r2rsim
