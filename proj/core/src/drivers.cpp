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

#include "r2rsim/drivers.hpp"

#include <stdexcept>

namespace r2rsim
{

namespace
{

constexpr std::size_t kZeroTimePollGuard = 1'000'000;

[[noreturn]] void spinning()
{
  throw std::logic_error("executor keeps polling without consuming time");
}

}  // namespace

Step LocalPoolDriver::step(SimTime now)
{
  for (std::size_t guard = 0; guard < kZeroTimePollGuard; ++guard) {
    if (charged_) {
      current_ = charged_;
      charged_.reset();
    }
    if (current_) {
      if (auto segment = tasks_[*current_].poll_step(now, tasks_, hooks_)) {
        return Step::run(*segment);
      }
      ex_.finish_poll(*current_);
      current_.reset();
    }
    ex_.drain_incoming();
    const auto next = ex_.next_ready();
    if (!next) {
      return mode_ == Mode::Run ? Step::block() : Step::done();
    }
    if (poll_cost_ > Duration{0}) {
      charged_ = next;
      return Step::run(poll_cost_);
    }
    current_ = next;
  }
  spinning();
}

Step PoolWorkerDriver::step(SimTime now)
{
  for (std::size_t guard = 0; guard < kZeroTimePollGuard; ++guard) {
    if (charged_) {
      current_ = charged_;
      charged_.reset();
    }
    if (current_) {
      if (auto segment = tasks_[*current_].poll_step(now, tasks_, hooks_)) {
        return Step::run(*segment);
      }
      if (ex_.finish_poll(*current_)) {
        // Woken while running: the same worker polls it again.
        if (poll_cost_ > Duration{0}) {
          charged_ = current_;
          current_.reset();
          return Step::run(poll_cost_);
        }
        continue;
      }
      current_.reset();
    }
    const auto next = ex_.next_ready();
    if (!next) {
      ex_.park(worker_);
      return Step::block();
    }
    if (poll_cost_ > Duration{0}) {
      charged_ = next;
      return Step::run(poll_cost_);
    }
    current_ = next;
  }
  spinning();
}

Step TokioWorkerDriver::step(SimTime now)
{
  for (std::size_t guard = 0; guard < kZeroTimePollGuard; ++guard) {
    if (charged_) {
      current_ = charged_;
      charged_.reset();
    }
    if (current_) {
      if (auto segment = tasks_[*current_].poll_step(now, tasks_, hooks_)) {
        return Step::run(*segment);
      }
      ex_.finish_poll(worker_, *current_);
      current_.reset();
    }
    const auto pick = ex_.pick_next(worker_);
    if (!pick) {
      ex_.park(worker_);
      return Step::block();
    }
    picks_.push_back(pick->source);
    if (poll_cost_ > Duration{0}) {
      charged_ = pick->task;
      return Step::run(poll_cost_);
    }
    current_ = pick->task;
  }
  spinning();
}

Step CppExecutorDriver::step(SimTime now)
{
  if (running_) {
    hooks_.callback_end(running_->task, running_->event, now);
    running_.reset();
  }
  for (std::size_t guard = 0; guard < kZeroTimePollGuard; ++guard) {
    while (next_ < pass_.size()) {
      const EntityId entity = pass_[next_++];
      const auto ev = ex_.node().take(entity, now, static_cast<std::int32_t>(self_));
      if (!ev) {
        continue;
      }
      const auto & cb = ex_.callback_for(entity);
      running_ = Running{cb.task, *ev};
      hooks_.callback_start(cb.task, *ev, now);
      if (cb.demand > Duration{0}) {
        return Step::run(cb.demand);
      }
      hooks_.callback_end(cb.task, *ev, now);
      running_.reset();
    }
    pass_ = ex_.sample();
    next_ = 0;
    if (pass_.empty()) {
      ex_.wait_set().waiter = self_;
      return Step::block();
    }
    ex_.wait_set().waiter.reset();
  }
  spinning();
}

}  // namespace r2rsim
