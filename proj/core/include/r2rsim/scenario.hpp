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
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "r2rsim/os_scheduler.hpp"
#include "r2rsim/ros_model.hpp"
#include "r2rsim/rta.hpp"
#include "r2rsim/time.hpp"

namespace r2rsim
{

enum class ExecutorModel : std::uint8_t
{
  Futures,
  FuturesJoin,
  FuturesRt,
  FuturesThreadPool,
  Futures2Threads,
  RclcppRt,
  RclcppSt,
  Tokio,
  TokioRt,
};

struct VariantId
{
  ExecutorModel model = ExecutorModel::FuturesRt;
  bool nort = false;  // subscriber threads use the default policy

  bool operator==(const VariantId &) const = default;
};

/// "futures-rt", "nort-tokio", ...
std::string to_string(VariantId variant);
std::optional<VariantId> parse_variant(std::string_view text);
std::vector<VariantId> all_variants(bool nort = false);

/// Parses "250us", "20ms", "1s", "0ns". Throws std::invalid_argument.
Duration parse_duration(std::string_view text);
/// Largest unit that represents the value exactly.
std::string format_duration(Duration d);

struct TopicSpec
{
  std::string name;
  std::optional<Duration> period;  // nullopt: published by callbacks only
  Duration phase{0};

  bool operator==(const TopicSpec &) const = default;
};

struct NodeSpec
{
  std::string name;
  int main_priority = 21;
  int dds_priority = 21;
  int callback_priority = 20;  // highest of the per-callback threads
  std::size_t pool_workers = 2;
  std::size_t join_workers = 2;
  std::size_t tokio_workers = 1;
  int tokio_rt_priority = 20;

  bool operator==(const NodeSpec &) const = default;
};

struct CallbackSpec
{
  std::string name;
  std::string node;
  std::string topic;
  Duration demand{0};
  std::vector<std::string> publishes;  // topics published at callback end
  std::size_t channel_capacity = kDefaultChannelCapacity;
  std::size_t qos_depth = kDefaultQosDepth;
  std::optional<int> priority;  // overrides the rate-monotonic slot

  bool operator==(const CallbackSpec &) const = default;
};

/// Periodic background thread outside the ROS graph.
struct LoadSpec
{
  std::string name;
  SchedPolicy policy = SchedPolicy::Fifo;
  int priority = kMinFifoPriority;
  Duration demand{0};
  Duration period{0};
  Duration phase{0};

  bool operator==(const LoadSpec &) const = default;
};

struct ChainHop
{
  std::string node;
  std::string topic;

  bool operator==(const ChainHop &) const = default;
};

struct ChainSpec
{
  std::string name;
  std::vector<ChainHop> hops;

  bool operator==(const ChainSpec &) const = default;
};

struct PublisherSpec
{
  int main_priority = 25;
  int dds_priority = 25;
  int worker_priority = 24;
  Duration publish_cost{0};

  bool operator==(const PublisherSpec &) const = default;
};

struct OverheadSpec
{
  Duration context_switch{0};
  Duration dds_cost = std::chrono::microseconds(10);
  Duration transport_delay{0};
  Duration take_cost{0};
  Duration poll_cost{0};
  Duration other_quantum = std::chrono::milliseconds(1);
  Duration rta_inflation{0};  // added to every callback's WCET in the analysis

  bool operator==(const OverheadSpec &) const = default;
};

struct ScenarioSpec
{
  std::string name = "scenario";
  VariantId variant;
  Duration duration = std::chrono::seconds(20);
  Duration drain = std::chrono::seconds(1);
  std::size_t replications = 10;
  std::uint64_t seed = 0;
  std::size_t cores = 1;
  bool random_phase = false;
  std::size_t warmup = 0;  // leading messages per chain left out of the stats

  PublisherSpec publisher;
  OverheadSpec overheads;
  std::vector<TopicSpec> topics;
  std::vector<NodeSpec> nodes;
  std::vector<CallbackSpec> callbacks;
  std::vector<LoadSpec> loads;
  std::vector<ChainSpec> chains;

  bool operator==(const ScenarioSpec &) const = default;

  const TopicSpec * find_topic(std::string_view name) const;
  const NodeSpec * find_node(std::string_view name) const;
  const CallbackSpec * find_callback(std::string_view name) const;
};

class ScenarioError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

ScenarioSpec parse_scenario(std::string_view text);
ScenarioSpec load_scenario(const std::string & path);
std::string serialize_scenario(const ScenarioSpec & spec);

/// Empty when the spec is usable.
std::vector<std::string> validate(const ScenarioSpec & spec);

/// Five topics, periods 10/20/50/100/200 ms, demands 2/4/5/15/50 ms, one
/// subscriber node on a single core.
ScenarioSpec table1_scenario();

/// Period driving a callback: its topic's, or for topics fed by other
/// callbacks, the period of the upstream callback.
std::optional<Duration> callback_period(const ScenarioSpec & spec, const CallbackSpec & cb);

/// Per-callback thread priorities used by the -rt variants: rate-monotonic
/// within each node starting at the node's callback_priority, unless set
/// explicitly. Same order as spec.callbacks.
std::vector<int> callback_priorities(const ScenarioSpec & spec);

/// Task set of every callback on a periodic source plus every Fifo load, at
/// the priorities the -rt variants run them.
std::vector<RtTask> rta_tasks(const ScenarioSpec & spec);

/// Sets each analysed callback's channel capacity to ceil(R / T) (at least
/// 1). Callbacks without a finite bound keep their capacity. Returns the
/// analysis used.
RtaResult apply_channel_dimensioning(
  ScenarioSpec & spec, std::int64_t divergence_factor = kDefaultDivergenceFactor);

}  // namespace r2rsim
