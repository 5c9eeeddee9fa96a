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

#include "r2rsim/ros_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace r2rsim
{

EventChannel::EventChannel(std::size_t capacity)
: capacity_(capacity)
{
  if (capacity_ == 0) {
    throw std::invalid_argument("channel capacity must be at least 1");
  }
}

bool EventChannel::offer(const EntityEvent & ev)
{
  ++offered_;
  if (buffer_.size() >= capacity_) {
    ++dropped_;
    return false;
  }
  buffer_.push_back(ev);
  max_occupancy_ = std::max(max_occupancy_, buffer_.size());
  return true;
}

std::optional<EntityEvent> EventChannel::take()
{
  if (buffer_.empty()) {
    return std::nullopt;
  }
  EntityEvent ev = buffer_.front();
  buffer_.pop_front();
  return ev;
}

Node::Node(std::string name, Trace * trace)
: name_(std::move(name)), trace_(trace)
{
}

EntityId Node::add_subscription(
  std::string name, TopicId topic, std::size_t qos_depth, std::size_t channel_capacity)
{
  if (qos_depth == 0) {
    throw std::invalid_argument("QoS history depth must be at least 1");
  }
  auto & e = entities_.emplace_back(Entity{
      std::move(name), EntityKind::Subscription, entities_.size(), topic, qos_depth, {}, 0,
      false, -1, EventChannel(channel_capacity), std::nullopt});
  return static_cast<EntityId>(e.creation_index);
}

EntityId Node::add_timer(std::string name, TopicId expiry_source, std::size_t channel_capacity)
{
  auto & e = entities_.emplace_back(Entity{
      std::move(name), EntityKind::Timer, entities_.size(), expiry_source, kDefaultQosDepth, {},
      0, false, -1, EventChannel(channel_capacity), std::nullopt});
  return static_cast<EntityId>(e.creation_index);
}

WaitSet & Node::add_wait_set(std::vector<EntityId> members)
{
  std::sort(members.begin(), members.end());
  for (auto id : members) {
    if (id >= entities_.size()) {
      throw std::out_of_range("wait set member is not an entity of this node");
    }
  }
  return wait_sets_.emplace_back(WaitSet{std::move(members), std::nullopt});
}

WaitSet & Node::add_wait_set_all()
{
  std::vector<EntityId> all(entities_.size());
  for (EntityId i = 0; i < all.size(); ++i) {
    all[i] = i;
  }
  return add_wait_set(std::move(all));
}

std::optional<EntityId> Node::find_entity(std::string_view name) const
{
  for (const auto & e : entities_) {
    if (e.name == name) {
      return static_cast<EntityId>(e.creation_index);
    }
  }
  return std::nullopt;
}

void Node::record(
  SimTime now, TraceKind kind, const EntityEvent & ev, const Entity & e, std::int32_t thread)
{
  if (!trace_) {
    return;
  }
  trace_->record(TraceEvent{
      now, kind, ev.source, ev.seq,
      e.task ? static_cast<std::int32_t>(*e.task) : kNoId, thread});
}

void Node::notify_waiters(EntityId id)
{
  for (auto & ws : wait_sets_) {
    if (!ws.waiter) {
      continue;
    }
    if (std::binary_search(ws.members.begin(), ws.members.end(), id)) {
      const ThreadId waiter = *ws.waiter;
      ws.waiter.reset();
      if (notifier_) {
        notifier_(waiter);
      }
    }
  }
}

void Node::deliver(const EntityEvent & ev, SimTime now)
{
  for (auto & e : entities_) {
    if (e.kind != EntityKind::Subscription || e.source != ev.source) {
      continue;
    }
    if (e.history.size() >= e.qos_depth) {
      ++e.qos_drops;
      record(now, TraceKind::QosDrop, e.history.front(), e, kNoId);
      e.history.pop_front();
    }
    e.history.push_back(ev);
    record(now, TraceKind::DdsDeliver, ev, e, kNoId);
    notify_waiters(static_cast<EntityId>(e.creation_index));
  }
}

void Node::fire_timer(EntityId timer, std::int64_t seq, SimTime)
{
  auto & e = entities_.at(timer);
  if (e.kind != EntityKind::Timer) {
    throw std::invalid_argument("fire_timer on a subscription");
  }
  e.timer_pending = true;
  e.timer_seq = seq;
  notify_waiters(timer);
}

std::vector<EntityId> Node::ready_entities(const WaitSet & ws, ReadyOrder order) const
{
  const EntityKind first =
    order == ReadyOrder::SubscriptionsFirst ? EntityKind::Subscription : EntityKind::Timer;
  std::vector<EntityId> ready;
  for (int pass = 0; pass < 2; ++pass) {
    for (auto id : ws.members) {
      const auto & e = entities_[id];
      if ((e.kind == first) == (pass == 0) && e.ready()) {
        ready.push_back(id);
      }
    }
  }
  return ready;
}

std::optional<EntityEvent> Node::take(EntityId id, SimTime now, std::int32_t thread)
{
  auto & e = entities_.at(id);
  std::optional<EntityEvent> ev;
  if (e.kind == EntityKind::Subscription) {
    if (!e.history.empty()) {
      ev = e.history.front();
      e.history.pop_front();
    }
  } else if (e.timer_pending) {
    e.timer_pending = false;
    ev = EntityEvent{e.source, e.timer_seq};
  }
  if (ev) {
    record(now, TraceKind::Sample, *ev, e, thread);
  }
  return ev;
}

void Node::sample_into_channel(EntityId id, SimTime now, const Waker & wake, std::int32_t thread)
{
  const auto ev = take(id, now, thread);
  if (!ev) {
    return;
  }
  auto & e = entities_[id];
  const bool accepted = e.channel.offer(*ev);
  record(now, accepted ? TraceKind::ChannelOffer : TraceKind::ChannelDrop, *ev, e, thread);
  if (e.task && wake) {
    wake(*e.task);
  }
}

std::vector<TaskId> Node::spin_once(const WaitSet & ws, SimTime now, const Waker & wake)
{
  std::vector<TaskId> woken;
  for (auto id : ready_entities(ws, ReadyOrder::SubscriptionsFirst)) {
    sample_into_channel(id, now, [&](TaskId task) {
        woken.push_back(task);
        if (wake) {
          wake(task);
        }
      });
  }
  return woken;
}

Step DdsPipeline::step(SimTime now)
{
  if (in_progress_) {
    node_.deliver(*in_progress_, now);
    in_progress_.reset();
  }
  if (inbox_.empty()) {
    return Step::block();
  }
  in_progress_ = inbox_.front();
  inbox_.pop_front();
  return Step::run(per_message_);
}

SpinOnce::SpinOnce(Node & node, WaitSet & ws, Waker wake, TimeoutArm arm_timeout, Config config)
: node_(node), ws_(ws), wake_(std::move(wake)), arm_timeout_(std::move(arm_timeout)),
  config_(config)
{
}

Step SpinOnce::step(SimTime now)
{
  if (!in_pass_) {
    pass_ = node_.ready_entities(ws_, ReadyOrder::SubscriptionsFirst);
    if (pass_.empty()) {
      if (deadline_ && now >= *deadline_) {
        deadline_.reset();
        ++calls_;
        ++timeouts_;
        return Step::done();
      }
      ws_.waiter = self_;
      if (!deadline_ && config_.timeout) {
        deadline_ = now + *config_.timeout;
        if (arm_timeout_) {
          arm_timeout_(self_, *deadline_);
        }
      }
      return Step::block();
    }
    ws_.waiter.reset();
    deadline_.reset();
    in_pass_ = true;
    next_ = 0;
  }
  const auto self = static_cast<std::int32_t>(self_);
  while (next_ < pass_.size()) {
    if (config_.take_cost > Duration{0} && !taking_) {
      taking_ = true;
      return Step::run(config_.take_cost);
    }
    taking_ = false;
    node_.sample_into_channel(pass_[next_++], now, wake_, self);
  }
  in_pass_ = false;
  ++calls_;
  return Step::done();
}

}  // namespace r2rsim
