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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "r2rsim/activity.hpp"
#include "r2rsim/os_scheduler.hpp"
#include "r2rsim/time.hpp"
#include "r2rsim/trace.hpp"

namespace r2rsim
{

using TopicId = std::int32_t;
using EntityId = std::uint32_t;
using TaskId = std::uint32_t;

inline constexpr std::size_t kDefaultChannelCapacity = 11;
inline constexpr std::size_t kDefaultQosDepth = 100;

/// One occurrence on an entity: a received message or a timer expiration.
/// `source` is the topic (or the timer's own expiry source) and `seq` its
/// per-source sequence number.
struct EntityEvent
{
  TopicId source = kNoId;
  std::int64_t seq = -1;

  bool operator==(const EntityEvent &) const = default;
};

/// Bounded FIFO from the sampling thread to the task running an entity's
/// callback. Offers to a full channel are dropped and counted.
class EventChannel
{
public:
  explicit EventChannel(std::size_t capacity = kDefaultChannelCapacity);

  /// Returns false if the channel was full and the event was dropped.
  bool offer(const EntityEvent & ev);
  std::optional<EntityEvent> take();

  std::size_t size() const noexcept { return buffer_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::uint64_t offered() const noexcept { return offered_; }
  std::uint64_t accepted() const noexcept { return offered_ - dropped_; }
  std::uint64_t dropped() const noexcept { return dropped_; }
  std::size_t max_occupancy() const noexcept { return max_occupancy_; }

  std::optional<TaskId> receiver;

private:
  std::size_t capacity_;
  std::deque<EntityEvent> buffer_;
  std::uint64_t offered_ = 0;
  std::uint64_t dropped_ = 0;
  std::size_t max_occupancy_ = 0;
};

enum class EntityKind : std::uint8_t { Subscription, Timer };

struct Entity
{
  std::string name;
  EntityKind kind = EntityKind::Subscription;
  std::size_t creation_index = 0;
  TopicId source = kNoId;

  // Subscription side of the middleware: QoS keep-last history.
  std::size_t qos_depth = kDefaultQosDepth;
  std::deque<EntityEvent> history;
  std::uint64_t qos_drops = 0;

  // Timer state; missed expirations collapse into one pending event.
  bool timer_pending = false;
  std::int64_t timer_seq = -1;

  EventChannel channel;
  std::optional<TaskId> task;

  bool ready() const noexcept
  {
    return kind == EntityKind::Subscription ? !history.empty() : timer_pending;
  }
};

/// Entities a thread can block on, in registration order.
struct WaitSet
{
  std::vector<EntityId> members;
  std::optional<ThreadId> waiter;
};

/// Order in which a sampling pass handles ready entities. R2R's spin_once
/// pushes subscriptions before timers; the rclcpp single-threaded executor
/// runs timers before subscriptions.
enum class ReadyOrder : std::uint8_t { SubscriptionsFirst, TimersFirst };

using Waker = std::function<void (TaskId)>;

/// ROS node: entities, wait sets over them, and the subscriber-side
/// middleware state (history buffers). Records sampling and delivery events
/// into an optional trace.
class Node
{
public:
  explicit Node(std::string name, Trace * trace = nullptr);

  Node(const Node &) = delete;
  Node & operator=(const Node &) = delete;

  EntityId add_subscription(
    std::string name, TopicId topic,
    std::size_t qos_depth = kDefaultQosDepth,
    std::size_t channel_capacity = kDefaultChannelCapacity);
  EntityId add_timer(
    std::string name, TopicId expiry_source,
    std::size_t channel_capacity = kDefaultChannelCapacity);

  WaitSet & add_wait_set(std::vector<EntityId> members);
  WaitSet & add_wait_set_all();

  const std::string & name() const noexcept { return name_; }
  Entity & entity(EntityId id) { return entities_.at(id); }
  const Entity & entity(EntityId id) const { return entities_.at(id); }
  std::size_t entity_count() const noexcept { return entities_.size(); }
  std::optional<EntityId> find_entity(std::string_view name) const;

  /// Called when the threads blocked on a wait set must be woken.
  void set_notifier(std::function<void (ThreadId)> notifier) { notifier_ = std::move(notifier); }

  /// Middleware delivery of a message on `ev.source`: appended to the history
  /// of every subscription on that topic (oldest dropped when full).
  void deliver(const EntityEvent & ev, SimTime now);
  void fire_timer(EntityId timer, std::int64_t seq, SimTime now);

  std::vector<EntityId> ready_entities(const WaitSet & ws, ReadyOrder order) const;

  /// Takes one event from a ready entity (rcl_take for subscriptions, timer
  /// call for timers).
  std::optional<EntityEvent> take(EntityId id, SimTime now, std::int32_t thread = kNoId);

  /// Takes one event from `id`, offers it to the entity's channel and wakes
  /// the receiving task even when the offer was dropped.
  void sample_into_channel(EntityId id, SimTime now, const Waker & wake, std::int32_t thread = kNoId);

  /// Zero-time spin_once: one event from every ready entity, subscriptions
  /// first. Returns the woken tasks in wake order.
  std::vector<TaskId> spin_once(const WaitSet & ws, SimTime now, const Waker & wake);

private:
  void notify_waiters(EntityId id);
  void record(SimTime now, TraceKind kind, const EntityEvent & ev, const Entity & e, std::int32_t thread);

  std::string name_;
  Trace * trace_;
  std::deque<Entity> entities_;  // stable addresses: tasks hold channel references
  std::deque<WaitSet> wait_sets_;
  std::function<void (ThreadId)> notifier_;
};

/// Subscriber-side middleware thread: processes arriving messages one at a
/// time, each costing `per_message` of CPU, then hands them to the node.
class DdsPipeline : public Activity
{
public:
  DdsPipeline(Node & node, Duration per_message) : node_(node), per_message_(per_message) {}

  void arrive(const EntityEvent & ev) { inbox_.push_back(ev); }
  Step step(SimTime now) override;

  std::size_t backlog() const noexcept { return inbox_.size(); }

private:
  Node & node_;
  Duration per_message_;
  std::deque<EntityEvent> inbox_;
  std::optional<EntityEvent> in_progress_;
};

/// R2R Node::spin_once as a thread activity: blocks on the wait set until an
/// entity is ready or the timeout passes, then for each ready entity in
/// order takes one event, pushes it to the entity's channel and wakes the
/// receiving task. Finishes once per call.
class SpinOnce : public Activity
{
public:
  using TimeoutArm = std::function<void (ThreadId, SimTime)>;

  struct Config
  {
    Duration take_cost{0};
    std::optional<Duration> timeout;
  };

  SpinOnce(Node & node, WaitSet & ws, Waker wake, TimeoutArm arm_timeout, Config config);

  void set_thread(ThreadId self) { self_ = self; }
  Step step(SimTime now) override;

  std::uint64_t calls() const noexcept { return calls_; }
  std::uint64_t timeouts() const noexcept { return timeouts_; }

private:
  Node & node_;
  WaitSet & ws_;
  Waker wake_;
  TimeoutArm arm_timeout_;
  Config config_;
  ThreadId self_ = 0;
  std::optional<SimTime> deadline_;
  std::vector<EntityId> pass_;
  std::size_t next_ = 0;
  bool taking_ = false;
  bool in_pass_ = false;
  std::uint64_t calls_ = 0;
  std::uint64_t timeouts_ = 0;
};

}  // namespace r2rsim
