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

#include "r2rsim/simulation.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "r2rsim/drivers.hpp"

namespace r2rsim
{

struct Simulation::NodeRuntime
{
  std::unique_ptr<Node> node;
  DdsPipeline * dds = nullptr;
  ThreadId dds_thread = 0;
};

struct Simulation::TimerSource
{
  enum class Kind : std::uint8_t { Publisher, Load };

  Kind kind;
  std::size_t index;  // publisher channel or load
  Duration period;
  Duration phase;
  std::int64_t next = 0;
};

struct Simulation::Delivery
{
  std::size_t node;
  EntityEvent event;
};

/// The publisher's timerfd reactor: turns expirations into channel events
/// for the publishing tasks.
class Simulation::TimerReactor : public Activity
{
public:
  TimerReactor(Simulation & sim) : sim_(sim) {}

  void expire(std::size_t channel, std::int64_t seq) { pending_.emplace_back(channel, seq); }

  Step step(SimTime now) override
  {
    while (!pending_.empty()) {
      const auto [index, seq] = pending_.front();
      pending_.pop_front();
      auto & channel = sim_.publisher_channels_[index];
      const TaskId task = *channel.receiver;
      const auto topic = sim_.trace_.tasks()[task].source;
      const bool accepted = channel.offer(EntityEvent{topic, seq});
      sim_.record(now, accepted ? TraceKind::ChannelOffer : TraceKind::ChannelDrop, topic, seq, task);
      sim_.waker()(task);
    }
    return Step::block();
  }

private:
  Simulation & sim_;
  std::deque<std::pair<std::size_t, std::int64_t>> pending_;
};

/// Publisher-side middleware thread: per-message cost, then the message is
/// on the wire.
class Simulation::OutboundDds : public Activity
{
public:
  OutboundDds(Simulation & sim, Duration per_message) : sim_(sim), per_message_(per_message) {}

  void push(std::int32_t topic, std::int64_t seq) { inbox_.emplace_back(topic, seq); }

  Step step(SimTime now) override
  {
    if (in_progress_) {
      sim_.route(in_progress_->first, in_progress_->second, now);
      in_progress_.reset();
    }
    if (inbox_.empty()) {
      return Step::block();
    }
    in_progress_ = inbox_.front();
    inbox_.pop_front();
    return Step::run(per_message_);
  }

private:
  Simulation & sim_;
  Duration per_message_;
  std::deque<std::pair<std::int32_t, std::int64_t>> inbox_;
  std::optional<std::pair<std::int32_t, std::int64_t>> in_progress_;
};

Simulation::Simulation(const ScenarioSpec & spec, std::uint64_t seed, SimulationOptions options)
: spec_(spec), options_(options), rng_(seed),
  sched_(events_, rng_, SchedulerConfig{spec.cores, spec.overheads.context_switch,
      spec.overheads.other_quantum, true})
{
  for (const auto & t : spec_.topics) {
    trace_.add_topic(t.name);
  }
  subscribers_.resize(spec_.topics.size());
  next_seq_.assign(spec_.topics.size(), 0);

  if (spec_.random_phase) {
    for (auto & t : spec_.topics) {
      if (t.period) {
        t.phase = Duration{static_cast<std::int64_t>(
              rng_.next_below(static_cast<std::uint64_t>(t.period->count())))};
      }
    }
  }

  build_publisher();
  for (const auto & n : spec_.nodes) {
    build_node(n);
  }
  build_loads();

  if (options_.trace_switches) {
    sched_.set_switch_observer([this](SimTime now, CoreId core, std::optional<ThreadId> thread) {
        trace_.record(TraceEvent{now, TraceKind::ThreadSwitch, kNoId, static_cast<std::int64_t>(core),
            kNoId, thread ? static_cast<std::int32_t>(*thread) : kNoId});
      });
  }

  for (std::uint32_t i = 0; i < timers_.size(); ++i) {
    if (timers_[i].phase < spec_.duration) {
      events_.schedule(SimTime{timers_[i].phase}, EventKind::TimerFire, i);
    }
  }
}

Simulation::~Simulation() = default;

ThreadId Simulation::spawn_thread(
  std::string name, SchedPolicy policy, int priority, std::unique_ptr<Program> program)
{
  trace_.add_thread(name);
  const ThreadId id = sched_.create_thread(ThreadConfig{std::move(name), policy, priority, {}}, *program);
  programs_.push_back(std::move(program));
  return id;
}

TaskId Simulation::add_task(std::unique_ptr<AsyncTask> task, const std::string & node, std::int32_t source)
{
  const auto name = task->name();
  const TaskId id = tasks_.add(std::move(task));
  const auto traced = trace_.add_task(TaskInfo{name, node, source});
  if (static_cast<TaskId>(traced) != id) {
    throw std::logic_error("trace and task table ids diverged");
  }
  publishes_.emplace_back();
  publisher_task_.push_back(false);
  return id;
}

Unparker Simulation::unparker()
{
  return [this](ThreadId thread) { sched_.make_ready(thread); };
}

Waker Simulation::waker()
{
  return [this](TaskId task) {
           record(events_.now(), TraceKind::TaskWake, trace_.tasks()[task].source, -1, task);
           tasks_.wake(task, sched_.current());
         };
}

void Simulation::build_publisher()
{
  const auto & pub = spec_.publisher;
  auto reactor = std::make_unique<TimerReactor>(*this);
  reactor_ = reactor.get();
  auto reactor_program = std::make_unique<Program>();
  reactor_program->loop(std::move(reactor));
  reactor_thread_ = spawn_thread("publisher/main", SchedPolicy::Fifo, pub.main_priority,
      std::move(reactor_program));

  auto outbound = std::make_unique<OutboundDds>(*this, spec_.overheads.dds_cost);
  outbound_ = outbound.get();
  auto outbound_program = std::make_unique<Program>();
  outbound_program->loop(std::move(outbound));
  outbound_thread_ = spawn_thread("publisher/dds", SchedPolicy::Fifo, pub.dds_priority,
      std::move(outbound_program));

  auto exec = std::make_unique<TokioLikeExecutor>(tasks_, rng_);
  exec->set_unparker(unparker());
  auto driver = std::make_unique<TokioWorkerDriver>(*exec, 0, tasks_, *this, spec_.overheads.poll_cost);
  auto worker_program = std::make_unique<Program>();
  worker_program->loop(std::move(driver));
  exec->add_worker(spawn_thread("publisher/worker", SchedPolicy::Fifo, pub.worker_priority,
      std::move(worker_program)));

  for (std::size_t t = 0; t < spec_.topics.size(); ++t) {
    const auto & topic = spec_.topics[t];
    if (!topic.period) {
      continue;
    }
    auto & channel = publisher_channels_.emplace_back();
    const auto id = add_task(
      std::make_unique<ChannelTask>("publish:" + topic.name, channel, pub.publish_cost),
      "publisher", static_cast<std::int32_t>(t));
    channel.receiver = id;
    publishes_[id].push_back(static_cast<std::int32_t>(t));
    publisher_task_[id] = true;
    exec->spawn(id);
    timers_.push_back(TimerSource{TimerSource::Kind::Publisher, publisher_channels_.size() - 1,
        *topic.period, topic.phase});
  }
  executors_.push_back(std::move(exec));
}

void Simulation::build_node(const NodeSpec & ns)
{
  const std::size_t node_index = nodes_.size();
  auto rt = std::make_unique<NodeRuntime>();
  rt->node = std::make_unique<Node>(ns.name, &trace_);
  Node & node = *rt->node;
  node.set_notifier([this](ThreadId thread) { sched_.make_ready(thread); });

  const auto model = spec_.variant.model;
  const SchedPolicy policy = spec_.variant.nort ? SchedPolicy::Other : SchedPolicy::Fifo;
  const auto & oh = spec_.overheads;
  const auto priorities = callback_priorities(spec_);
  const bool cpp = model == ExecutorModel::RclcppRt || model == ExecutorModel::RclcppSt;

  struct Member
  {
    EntityId entity;
    TaskId task;
    int priority;
    Duration demand;
    std::string name;
  };
  std::vector<Member> members;

  for (std::size_t i = 0; i < spec_.callbacks.size(); ++i) {
    const auto & cb = spec_.callbacks[i];
    if (cb.node != ns.name) {
      continue;
    }
    const auto topic = *trace_.find_topic(cb.topic);
    const EntityId entity =
      node.add_subscription(cb.name, topic, cb.qos_depth, cb.channel_capacity);
    auto & subs = subscribers_[static_cast<std::size_t>(topic)];
    if (std::find(subs.begin(), subs.end(), node_index) == subs.end()) {
      subs.push_back(node_index);
    }
    std::unique_ptr<AsyncTask> task;
    if (cpp) {
      task = std::make_unique<DirectCallback>(cb.name);
    } else {
      task = std::make_unique<ChannelTask>(cb.name, node.entity(entity).channel, cb.demand);
    }
    const TaskId id = add_task(std::move(task), ns.name, topic);
    node.entity(entity).task = id;
    node.entity(entity).channel.receiver = id;
    for (const auto & p : cb.publishes) {
      publishes_[id].push_back(*trace_.find_topic(p));
    }
    members.push_back(Member{entity, id, priorities[i], cb.demand, cb.name});
  }

  auto dds = std::make_unique<DdsPipeline>(node, oh.dds_cost);
  rt->dds = dds.get();
  auto dds_program = std::make_unique<Program>();
  dds_program->loop(std::move(dds));
  rt->dds_thread = spawn_thread(ns.name + "/dds", policy, ns.dds_priority, std::move(dds_program));

  const auto arm_timeout = [this](ThreadId thread, SimTime at) {
      events_.schedule(at, EventKind::SamplerWake, thread);
    };
  const auto make_spin = [&](WaitSet & ws) {
      return std::make_unique<SpinOnce>(node, ws, waker(), arm_timeout,
               SpinOnce::Config{oh.take_cost, std::nullopt});
    };
  // Main thread running spin_once in a loop, optionally followed by more
  // activities in the same loop.
  const auto spawn_spinner = [&](const std::string & name, int priority,
      std::unique_ptr<Program> program) {
      auto spin = make_spin(node.add_wait_set_all());
      auto * spin_ptr = spin.get();
      auto body = std::make_unique<Program>();
      if (!program) {
        body->loop(std::move(spin));
        program = std::move(body);
      }
      const ThreadId id = spawn_thread(name, policy, priority, std::move(program));
      spin_ptr->set_thread(id);
      return id;
    };
  const auto new_local_pool = [&]() {
      auto ex = std::make_unique<LocalPoolExecutor>(tasks_);
      ex->set_unparker(unparker());
      auto * raw = ex.get();
      executors_.push_back(std::move(ex));
      return raw;
    };

  switch (model) {
    case ExecutorModel::Futures: {
        auto * ex = new_local_pool();
        for (const auto & m : members) {
          ex->spawn(m.task);
        }
        auto spin = make_spin(node.add_wait_set_all());
        auto * spin_ptr = spin.get();
        auto program = std::make_unique<Program>();
        program->then(std::make_unique<LocalPoolDriver>(*ex, tasks_, *this,
          LocalPoolDriver::Mode::RunUntilStalled, oh.poll_cost));
        program->loop(std::move(spin));
        program->loop(std::make_unique<LocalPoolDriver>(*ex, tasks_, *this,
          LocalPoolDriver::Mode::RunUntilStalled, oh.poll_cost));
        const ThreadId main = spawn_thread(ns.name + "/main", policy, ns.main_priority, std::move(program));
        spin_ptr->set_thread(main);
        ex->set_host(main);
        break;
      }
    case ExecutorModel::FuturesRt:
    case ExecutorModel::Futures2Threads: {
        spawn_spinner(ns.name + "/main", ns.main_priority, nullptr);
        const bool per_callback = model == ExecutorModel::FuturesRt;
        LocalPoolExecutor * shared = per_callback ? nullptr : new_local_pool();
        const auto spawn_runner = [&](LocalPoolExecutor & ex, const std::string & name, int priority) {
            auto program = std::make_unique<Program>();
            program->loop(std::make_unique<LocalPoolDriver>(ex, tasks_, *this,
              LocalPoolDriver::Mode::Run, oh.poll_cost));
            ex.set_host(spawn_thread(name, policy, priority, std::move(program)));
          };
        if (per_callback) {
          for (const auto & m : members) {
            auto * ex = new_local_pool();
            ex->spawn(m.task);
            spawn_runner(*ex, ns.name + "/" + m.name, m.priority);
          }
        } else {
          for (const auto & m : members) {
            shared->spawn(m.task);
          }
          spawn_runner(*shared, ns.name + "/executor", ns.callback_priority);
        }
        break;
      }
    case ExecutorModel::FuturesJoin:
    case ExecutorModel::FuturesThreadPool: {
        spawn_spinner(ns.name + "/main", ns.main_priority, nullptr);
        auto ex = std::make_unique<ThreadPoolExecutor>(tasks_);
        ex->set_unparker(unparker());
        const bool join = model == ExecutorModel::FuturesJoin;
        const std::size_t workers = join ? ns.join_workers : ns.pool_workers;
        for (std::size_t w = 0; w < workers; ++w) {
          auto program = std::make_unique<Program>();
          program->loop(std::make_unique<PoolWorkerDriver>(*ex, w, tasks_, *this, oh.poll_cost));
          ex->add_worker(spawn_thread(fmt::format("{}/pool{}", ns.name, w), policy,
            ns.callback_priority, std::move(program)));
        }
        if (join && !members.empty()) {
          std::vector<TaskId> ids;
          for (const auto & m : members) {
            ids.push_back(m.task);
          }
          const TaskId group = tasks_.join(ns.name + "/join", ids);
          const auto traced = trace_.add_task(TaskInfo{ns.name + "/join", ns.name, kNoId});
          if (static_cast<TaskId>(traced) != group) {
            throw std::logic_error("trace and task table ids diverged");
          }
          publishes_.emplace_back();
          publisher_task_.push_back(false);
          ex->spawn(group);
        } else {
          for (const auto & m : members) {
            ex->spawn(m.task);
          }
        }
        executors_.push_back(std::move(ex));
        break;
      }
    case ExecutorModel::Tokio:
    case ExecutorModel::TokioRt: {
        spawn_spinner(ns.name + "/main", ns.main_priority, nullptr);
        auto ex = std::make_unique<TokioLikeExecutor>(tasks_, rng_);
        ex->set_unparker(unparker());
        const int worker_priority = model == ExecutorModel::Tokio ? ns.main_priority : ns.tokio_rt_priority;
        for (std::size_t w = 0; w < ns.tokio_workers; ++w) {
          auto program = std::make_unique<Program>();
          program->loop(std::make_unique<TokioWorkerDriver>(*ex, w, tasks_, *this, oh.poll_cost));
          ex->add_worker(spawn_thread(fmt::format("{}/worker{}", ns.name, w), policy,
            worker_priority, std::move(program)));
        }
        for (const auto & m : members) {
          ex->spawn(m.task);
        }
        executors_.push_back(std::move(ex));
        break;
      }
    case ExecutorModel::RclcppRt:
    case ExecutorModel::RclcppSt: {
        const auto spawn_cpp = [&](WaitSet & ws, const std::vector<Member> & group,
            const std::string & name, int priority) {
            auto ex = std::make_unique<CppSingleThreadedExecutor>(node, ws);
            for (const auto & m : group) {
              ex->add_callback(CppSingleThreadedExecutor::Callback{m.entity, m.task, m.demand});
            }
            auto driver = std::make_unique<CppExecutorDriver>(*ex, *this);
            auto * driver_ptr = driver.get();
            auto program = std::make_unique<Program>();
            program->loop(std::move(driver));
            driver_ptr->set_thread(spawn_thread(name, policy, priority, std::move(program)));
            cpp_executors_.push_back(std::move(ex));
          };
        if (model == ExecutorModel::RclcppRt) {
          for (const auto & m : members) {
            spawn_cpp(node.add_wait_set({m.entity}), {m}, ns.name + "/" + m.name, m.priority);
          }
        } else {
          spawn_cpp(node.add_wait_set_all(), members, ns.name + "/main", ns.main_priority);
        }
        break;
      }
  }
  nodes_.push_back(std::move(rt));
}

void Simulation::build_loads()
{
  for (const auto & l : spec_.loads) {
    auto job = std::make_unique<PeriodicJob>(l.demand);
    loads_.emplace_back(l.name, job.get());
    auto program = std::make_unique<Program>();
    program->loop(std::move(job));
    load_threads_.push_back(spawn_thread("load/" + l.name, l.policy, l.priority, std::move(program)));
    timers_.push_back(TimerSource{TimerSource::Kind::Load, loads_.size() - 1, l.period, l.phase});
  }
}

SimTime Simulation::horizon() const noexcept
{
  return SimTime{spec_.duration + spec_.drain};
}

void Simulation::run()
{
  run_until(horizon());
  finalize();
}

void Simulation::run_until(SimTime until)
{
  if (!started_) {
    started_ = true;
    sched_.settle();
  }
  while (const SimEvent * next = events_.peek()) {
    if (next->at > until) {
      break;
    }
    const SimEvent ev = *events_.advance();
    dispatch(ev);
    sched_.settle();
    if (options_.check_invariants) {
      sched_.check_invariants();
    }
  }
}

void Simulation::dispatch(const SimEvent & ev)
{
  if (sched_.handle(ev)) {
    return;
  }
  switch (ev.kind) {
    case EventKind::TimerFire:
      on_timer(ev.target);
      return;
    case EventKind::MessageArrival: {
        const auto & d = deliveries_.at(ev.token);
        auto & rt = *nodes_.at(d.node);
        rt.dds->arrive(d.event);
        sched_.make_ready(rt.dds_thread);
        return;
      }
    case EventKind::SamplerWake:
      sched_.make_ready(ev.target);
      return;
    case EventKind::QuantumExpiry:
    case EventKind::WorkCompletion:
      break;
  }
  throw std::logic_error(fmt::format("unhandled event '{}'", to_string(ev.kind)));
}

void Simulation::on_timer(std::uint32_t source)
{
  auto & timer = timers_.at(source);
  const std::int64_t k = timer.next++;
  if (timer.kind == TimerSource::Kind::Publisher) {
    reactor_->expire(timer.index, k);
    sched_.make_ready(reactor_thread_);
  } else {
    loads_.at(timer.index).second->release();
    sched_.make_ready(load_threads_.at(timer.index));
  }
  const SimTime next = SimTime{timer.phase + timer.period * (k + 1)};
  if (next < SimTime{spec_.duration}) {
    events_.schedule(next, EventKind::TimerFire, source);
  }
}

void Simulation::record(
  SimTime now, TraceKind kind, std::int32_t topic, std::int64_t seq, std::optional<TaskId> task)
{
  const auto thread = sched_.current();
  trace_.record(TraceEvent{now, kind, topic, seq,
      task ? static_cast<std::int32_t>(*task) : kNoId,
      thread ? static_cast<std::int32_t>(*thread) : kNoId});
}

void Simulation::callback_start(TaskId task, const EntityEvent & ev, SimTime now)
{
  record(now, TraceKind::CallbackStart, ev.source, ev.seq, task);
}

void Simulation::callback_end(TaskId task, const EntityEvent & ev, SimTime now)
{
  for (const auto topic : publishes_.at(task)) {
    publish(topic, task, now);
  }
  record(now, TraceKind::CallbackEnd, ev.source, ev.seq, task);
}

void Simulation::publish(std::int32_t topic, std::optional<TaskId> task, SimTime now)
{
  const std::int64_t seq = next_seq_.at(static_cast<std::size_t>(topic))++;
  record(now, TraceKind::Publish, topic, seq, task);
  if (task && publisher_task_.at(*task)) {
    outbound_->push(topic, seq);
    sched_.make_ready(outbound_thread_);
  } else {
    route(topic, seq, now);
  }
}

void Simulation::route(std::int32_t topic, std::int64_t seq, SimTime now)
{
  for (const auto node : subscribers_.at(static_cast<std::size_t>(topic))) {
    deliveries_.push_back(Delivery{node, EntityEvent{topic, seq}});
    events_.schedule(now + spec_.overheads.transport_delay, EventKind::MessageArrival,
      static_cast<std::uint32_t>(node), deliveries_.size() - 1);
  }
}

void Simulation::finalize()
{
  if (finalized_) {
    return;
  }
  finalized_ = true;
  std::vector<ThreadSummary> summaries;
  for (ThreadId t = 0; t < sched_.thread_count(); ++t) {
    const auto & s = sched_.stats(t);
    summaries.push_back(ThreadSummary{sched_.config(t).name, s.executed, s.overhead, s.dispatches,
        s.preemptions});
  }
  trace_.set_thread_summaries(std::move(summaries));
}

Node & Simulation::node(std::string_view name)
{
  for (auto & rt : nodes_) {
    if (rt->node->name() == name) {
      return *rt->node;
    }
  }
  throw std::out_of_range(fmt::format("no node '{}'", name));
}

std::optional<TaskId> Simulation::task_of(std::string_view callback) const
{
  const auto & infos = trace_.tasks();
  for (std::size_t i = 0; i < infos.size(); ++i) {
    if (infos[i].name == callback) {
      return static_cast<TaskId>(i);
    }
  }
  return std::nullopt;
}

std::optional<ThreadId> Simulation::thread(std::string_view name) const
{
  const auto & names = trace_.threads();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      return static_cast<ThreadId>(i);
    }
  }
  return std::nullopt;
}

const PeriodicJob & Simulation::load(std::string_view name) const
{
  for (const auto & [n, job] : loads_) {
    if (n == name) {
      return *job;
    }
  }
  throw std::out_of_range(fmt::format("no load '{}'", name));
}

std::unique_ptr<Simulation> build_variant(
  const ScenarioSpec & spec, std::uint64_t seed, SimulationOptions options)
{
  const auto violations = validate(spec);
  if (!violations.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto & v : violations) {
      msg += "\n  " + v;
    }
    throw ScenarioError(msg);
  }
  return std::make_unique<Simulation>(spec, seed, options);
}

}  // namespace r2rsim
