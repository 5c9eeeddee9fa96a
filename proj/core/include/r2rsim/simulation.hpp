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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "r2rsim/activity.hpp"
#include "r2rsim/event_queue.hpp"
#include "r2rsim/executors.hpp"
#include "r2rsim/os_scheduler.hpp"
#include "r2rsim/rng.hpp"
#include "r2rsim/ros_model.hpp"
#include "r2rsim/scenario.hpp"
#include "r2rsim/tasks.hpp"
#include "r2rsim/trace.hpp"

namespace r2rsim
{

struct SimulationOptions
{
  bool check_invariants = false;  // scheduler invariants after every event
  bool trace_switches = true;
};

/// One replication of a scenario: publisher, subscriber nodes wired for the
/// scenario's variant, background loads, and the event loop driving them.
class Simulation : public ExecutionHooks
{
public:
  Simulation(const ScenarioSpec & spec, std::uint64_t seed, SimulationOptions options = {});
  ~Simulation() override;

  Simulation(const Simulation &) = delete;
  Simulation & operator=(const Simulation &) = delete;

  /// Runs to duration + drain and finalizes the trace.
  void run();
  void run_until(SimTime horizon);
  SimTime horizon() const noexcept;

  const ScenarioSpec & spec() const noexcept { return spec_; }
  const Trace & trace() const noexcept { return trace_; }
  OsScheduler & scheduler() noexcept { return sched_; }
  EventQueue & events() noexcept { return events_; }
  TaskTable & tasks() noexcept { return tasks_; }

  Node & node(std::string_view name);
  std::optional<TaskId> task_of(std::string_view callback) const;
  std::optional<ThreadId> thread(std::string_view name) const;
  const PeriodicJob & load(std::string_view name) const;

  void callback_start(TaskId task, const EntityEvent & ev, SimTime now) override;
  void callback_end(TaskId task, const EntityEvent & ev, SimTime now) override;

private:
  struct NodeRuntime;
  struct TimerSource;
  struct Delivery;
  class TimerReactor;
  class OutboundDds;

  void build_publisher();
  void build_node(const NodeSpec & spec);
  void build_loads();

  ThreadId spawn_thread(std::string name, SchedPolicy policy, int priority,
    std::unique_ptr<Program> program);
  TaskId add_task(std::unique_ptr<AsyncTask> task, const std::string & node, std::int32_t source);
  Unparker unparker();
  Waker waker();

  void dispatch(const SimEvent & ev);
  void on_timer(std::uint32_t source);
  void publish(std::int32_t topic, std::optional<TaskId> task, SimTime now);
  void route(std::int32_t topic, std::int64_t seq, SimTime now);
  void record(SimTime now, TraceKind kind, std::int32_t topic, std::int64_t seq,
    std::optional<TaskId> task);
  void finalize();

  ScenarioSpec spec_;
  SimulationOptions options_;
  EventQueue events_;
  Rng rng_;
  OsScheduler sched_;
  Trace trace_;
  TaskTable tasks_;

  std::vector<std::unique_ptr<Program>> programs_;
  std::vector<std::unique_ptr<Executor>> executors_;
  std::vector<std::unique_ptr<CppSingleThreadedExecutor>> cpp_executors_;
  std::vector<std::unique_ptr<NodeRuntime>> nodes_;
  std::vector<TimerSource> timers_;
  std::vector<Delivery> deliveries_;
  std::vector<std::vector<std::size_t>> subscribers_;  // per topic: node indices
  std::vector<std::int64_t> next_seq_;                 // per topic
  std::vector<std::vector<std::int32_t>> publishes_;   // per task
  std::vector<bool> publisher_task_;                   // per task

  std::deque<EventChannel> publisher_channels_;
  TimerReactor * reactor_ = nullptr;
  ThreadId reactor_thread_ = 0;
  OutboundDds * outbound_ = nullptr;
  ThreadId outbound_thread_ = 0;
  std::vector<std::pair<std::string, PeriodicJob *>> loads_;
  std::vector<ThreadId> load_threads_;

  bool started_ = false;
  bool finalized_ = false;
};

/// Throws ScenarioError if the spec has validation violations.
std::unique_ptr<Simulation> build_variant(
  const ScenarioSpec & spec, std::uint64_t seed, SimulationOptions options = {});

}  // namespace r2rsim
