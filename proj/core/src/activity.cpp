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

#include "r2rsim/activity.hpp"

#include <stdexcept>

namespace r2rsim
{

namespace
{
constexpr std::size_t kMaxDoneChain = 100'000;
}  // namespace

Program & Program::then(std::unique_ptr<Activity> activity)
{
  prologue_.push_back(std::move(activity));
  return *this;
}

Program & Program::loop(std::unique_ptr<Activity> activity)
{
  loop_.push_back(std::move(activity));
  return *this;
}

Activity * Program::current()
{
  if (!in_loop_) {
    if (index_ < prologue_.size()) {
      return prologue_[index_].get();
    }
    in_loop_ = true;
    index_ = 0;
  }
  return loop_.empty() ? nullptr : loop_[index_].get();
}

void Program::advance()
{
  ++index_;
  if (in_loop_ && index_ >= loop_.size()) {
    index_ = 0;
  }
}

std::optional<Duration> Program::step(SimTime now)
{
  for (std::size_t chained = 0; chained < kMaxDoneChain; ++chained) {
    Activity * activity = current();
    if (!activity) {
      return std::nullopt;
    }
    const Step s = activity->step(now);
    switch (s.kind) {
      case Step::Kind::Run:
        return s.duration;
      case Step::Kind::Block:
        return std::nullopt;
      case Step::Kind::Done:
        advance();
        break;
    }
  }
  throw std::logic_error("thread program loops without running or blocking");
}

Step PeriodicJob::step(SimTime now)
{
  if (in_job_) {
    in_job_ = false;
    --pending_;
    ++completed_;
    completions_.push_back(now);
  }
  if (pending_ == 0) {
    return Step::block();
  }
  in_job_ = true;
  return Step::run(demand_);
}

}  // namespace r2rsim
