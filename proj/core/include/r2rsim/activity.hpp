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
#include <vector>

#include "r2rsim/os_scheduler.hpp"
#include "r2rsim/time.hpp"

namespace r2rsim
{

/// What an activity wants its thread to do next.
struct Step
{
  enum class Kind : std::uint8_t { Run, Block, Done };

  Kind kind = Kind::Done;
  Duration duration{0};

  static Step run(Duration d) { return Step{Kind::Run, d}; }
  static Step block() { return Step{Kind::Block, Duration{0}}; }
  static Step done() { return Step{Kind::Done, Duration{0}}; }
};

/// One phase of a thread's program, e.g. a spin_once call or an executor
/// run. step() is re-entered after every segment and after every wake-up, so
/// an activity must re-check its blocking condition each time.
class Activity
{
public:
  virtual ~Activity() = default;
  virtual Step step(SimTime now) = 0;
};

/// Thread body built from a prologue that runs once followed by a loop that
/// repeats forever. An empty loop parks the thread after the prologue.
class Program : public ThreadBody
{
public:
  Program() = default;

  Program & then(std::unique_ptr<Activity> activity);
  Program & loop(std::unique_ptr<Activity> activity);

  std::optional<Duration> step(SimTime now) override;

private:
  Activity * current();
  void advance();

  std::vector<std::unique_ptr<Activity>> prologue_;
  std::vector<std::unique_ptr<Activity>> loop_;
  std::size_t index_ = 0;
  bool in_loop_ = false;
};

/// Busy-loop job released by external triggers; used for periodic
/// background load and in scheduler tests.
class PeriodicJob : public Activity
{
public:
  explicit PeriodicJob(Duration demand) : demand_(demand) {}

  void release() { ++pending_; }
  Step step(SimTime now) override;

  std::uint64_t completed() const noexcept { return completed_; }
  const std::vector<SimTime> & completion_times() const noexcept { return completions_; }

private:
  Duration demand_;
  std::uint64_t pending_ = 0;
  std::uint64_t completed_ = 0;
  bool in_job_ = false;
  std::vector<SimTime> completions_;
};

}  // namespace r2rsim
