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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Pass criterion numbers to run a subset.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "r2rsim/drivers.hpp"
#include "r2rsim/executors.hpp"
#include "r2rsim/metrics.hpp"
#include "r2rsim/rta.hpp"
#include "r2rsim/runner.hpp"
#include "r2rsim/scenario.hpp"
#include "r2rsim/simulation.hpp"

namespace
{

using namespace r2rsim;
using std::chrono::milliseconds;
using std::chrono::microseconds;
using std::chrono::seconds;

class Check
{
public:
  void expect(bool ok, const std::string & what)
  {
    if (!ok) {
      failures_.push_back(what);
    }
  }

  bool ok() const { return failures_.empty(); }
  const std::vector<std::string> & failures() const { return failures_; }

private:
  std::vector<std::string> failures_;
};

std::string ms_text(Duration d)
{
  std::ostringstream out;
  out << static_cast<double>(d.count()) / 1e6 << " ms";
  return out.str();
}

std::map<std::string, Duration> simulated_maxima(const Simulation & sim)
{
  std::map<std::string, Duration> out;
  for (const auto & chain : extract_latencies(sim.trace(), default_chains(sim.spec()))) {
    Duration max{0};
    for (const auto & r : chain.records) {
      max = std::max(max, r.latency);
    }
    out[chain.chain] = max;
  }
  return out;
}

// ------------------------------------------------------------------------ 1

void rta_reproduction(Check & check)
{
  const auto start = std::chrono::steady_clock::now();
  std::ostringstream report;
  const int status = r2rsim::analyze(table1_scenario(), report);
  const auto result = r2rsim::analyze(rta_tasks(table1_scenario()));
  const auto elapsed = std::chrono::steady_clock::now() - start;

  const std::vector<std::int64_t> expected{2, 6, 13, 36, 170};
  check.expect(status == 0, "analyze exit status 0");
  check.expect(result.entries.size() == expected.size(), "five analysed tasks");
  for (std::size_t i = 0; i < expected.size() && i < result.entries.size(); ++i) {
    const auto & e = result.entries[i];
    check.expect(e.response.converged && e.response.value == milliseconds(expected[i]),
      e.task.id + " R = " + std::to_string(expected[i]) + " ms (got " + ms_text(e.response.value) + ")");
  }
  check.expect(std::abs(result.utilization - 0.90) < 1e-12, "utilization 0.90");
  check.expect(report.str().find("utilization 0.90") != std::string::npos, "report shows utilization 0.90");
  check.expect(result.schedulable, "table1 schedulable");
  check.expect(elapsed < seconds(1), "analysis under 1 s");
}

// ------------------------------------------------------------------------ 2

double unit_draw(Rng & rng)
{
  return static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
}

// UUniFast utilizations for n tasks summing to `total`.
std::vector<double> uunifast(Rng & rng, std::size_t n, double total)
{
  std::vector<double> u;
  double remaining = total;
  for (std::size_t i = 1; i < n; ++i) {
    const double next = remaining * std::pow(unit_draw(rng), 1.0 / static_cast<double>(n - i));
    u.push_back(remaining - next);
    remaining = next;
  }
  u.push_back(remaining);
  return u;
}

ScenarioSpec random_task_set(Rng & rng)
{
  ScenarioSpec spec;
  spec.name = "random";
  spec.variant = VariantId{ExecutorModel::FuturesRt, false};
  spec.overheads.dds_cost = Duration{0};
  NodeSpec node;
  node.name = "subscriber";
  spec.nodes.push_back(node);
  const std::size_t n = 3 + rng.next_below(6);
  const double total = 0.5 + 0.45 * unit_draw(rng);
  const auto utilizations = uunifast(rng, n, total);
  Duration longest{0};
  for (std::size_t i = 0; i < n; ++i) {
    const Duration period = milliseconds(5 + static_cast<std::int64_t>(rng.next_below(196)));
    const auto wcet_us = static_cast<std::int64_t>(
      utilizations[i] * static_cast<double>(std::chrono::duration_cast<microseconds>(period).count()));
    TopicSpec topic;
    topic.name = "topic" + std::to_string(i + 1);
    topic.period = period;
    spec.topics.push_back(topic);
    CallbackSpec cb;
    cb.name = "callback" + std::to_string(i + 1);
    cb.node = "subscriber";
    cb.topic = topic.name;
    cb.demand = microseconds(std::max<std::int64_t>(1, wcet_us));
    spec.callbacks.push_back(cb);
    longest = std::max(longest, period);
  }
  spec.duration = longest * 2;
  return spec;
}

bool maxima_equal_rta(const ScenarioSpec & spec, Check & check, const std::string & label)
{
  Simulation sim(spec, spec.seed);
  sim.run();
  const auto maxima = simulated_maxima(sim);
  const auto rta = r2rsim::analyze(rta_tasks(spec));
  bool all = true;
  for (const auto & cb : spec.callbacks) {
    const auto * entry = rta.find(cb.name);
    const auto it = maxima.find(cb.topic);
    const bool equal = entry && it != maxima.end() && entry->response.converged &&
      it->second == entry->response.value;
    if (!equal) {
      check.expect(false, label + " " + cb.topic + ": simulated max " +
        (it != maxima.end() ? ms_text(it->second) : "-") + " vs R " +
        (entry ? ms_text(entry->response.value) : "-"));
      all = false;
    }
  }
  return all;
}

void oracle_equivalence(Check & check)
{
  const auto start = std::chrono::steady_clock::now();
  auto table1 = table1_scenario();
  table1.overheads.dds_cost = Duration{0};
  table1.duration = seconds(1);
  maxima_equal_rta(table1, check, "table1");

  Rng rng(2024);
  std::size_t accepted = 0;
  std::size_t attempts = 0;
  while (accepted < 25 && attempts < 10'000) {
    ++attempts;
    auto spec = random_task_set(rng);
    const auto tasks = rta_tasks(spec);
    if (utilization(tasks) > 0.95 || !r2rsim::analyze(tasks).schedulable) {
      continue;
    }
    maxima_equal_rta(spec, check, "random set " + std::to_string(accepted + 1));
    ++accepted;
  }
  check.expect(accepted == 25, "25 schedulable random task sets generated");
  check.expect(std::chrono::steady_clock::now() - start < seconds(30), "runtime under 30 s");
}

// ------------------------------------------------------------------------ 3

void deadline_verdicts(Check & check)
{
  const auto spec = table1_scenario();
  std::map<ExecutorModel, std::vector<ComparisonRow>> rows;
  for (auto v : all_variants()) {
    auto s = spec;
    s.variant = v;
    rows[v.model] = run_variant(s, 0).rows;
  }
  for (auto model : {ExecutorModel::FuturesRt, ExecutorModel::RclcppRt}) {
    const auto name = to_string(VariantId{model, false});
    check.expect(rows[model].size() == 5, name + " reports five topics");
    for (const auto & r : rows[model]) {
      check.expect(r.verdict != Verdict::DeadlineMiss, name + " meets the " + r.chain + " deadline");
    }
  }
  for (auto model : {ExecutorModel::Futures, ExecutorModel::FuturesJoin, ExecutorModel::FuturesThreadPool,
      ExecutorModel::Futures2Threads, ExecutorModel::Tokio, ExecutorModel::TokioRt})
  {
    bool missed = false;
    for (const auto & r : rows[model]) {
      const bool short_deadline = r.chain == "topic1" || r.chain == "topic2" || r.chain == "topic3";
      missed = missed || (short_deadline && r.verdict == Verdict::DeadlineMiss);
    }
    check.expect(missed, to_string(VariantId{model, false}) + " misses a deadline of topics 1-3");
  }
}

// ------------------------------------------------------------------------ 4

struct Recorder : ExecutionHooks
{
  explicit Recorder(const TaskTable & t) : tasks(t) {}
  void callback_start(TaskId task, const EntityEvent & ev, SimTime) override
  {
    starts.push_back(tasks[task].name() + std::to_string(ev.seq));
  }
  void callback_end(TaskId, const EntityEvent &, SimTime) override {}

  const TaskTable & tasks;
  std::vector<std::string> starts;
};

struct FiveEntityNode
{
  FiveEntityNode()
  {
    for (const std::string name : {"A", "B", "C", "D", "E"}) {
      const auto topic = static_cast<TopicId>(ids.size());
      const auto e = node.add_subscription(name, topic);
      ids.push_back(tasks.add(std::make_unique<ChannelTask>(name, node.entity(e).channel, Duration{0})));
      node.entity(e).task = ids.back();
    }
    ws = &node.add_wait_set_all();
  }

  void sample(std::initializer_list<int> ready)
  {
    for (int t : ready) {
      node.deliver({t, ++seq[t]}, SimTime{});
    }
    node.spin_once(*ws, SimTime{}, [this](TaskId t) { tasks.wake(t); });
  }

  std::string queue(const LocalPoolExecutor & ex) const
  {
    std::string out;
    for (auto id : ex.ready_queue()) {
      if (const auto * join = dynamic_cast<const JoinTask *>(&tasks[id])) {
        out += "{";
        for (auto m : join->ready_members()) {
          out += tasks[m].name();
        }
        out += "}";
      } else {
        out += tasks[id].name();
      }
      out += " ";
    }
    return out;
  }

  Node node{"node"};
  WaitSet * ws = nullptr;
  TaskTable tasks;
  std::vector<TaskId> ids;
  std::map<int, std::int64_t> seq;
};

std::vector<std::tuple<std::int64_t, std::string, std::int64_t>> subscriber_callbacks(const Simulation & sim)
{
  std::vector<std::tuple<std::int64_t, std::string, std::int64_t>> out;
  const auto & trace = sim.trace();
  for (const auto & ev : trace.events()) {
    if (ev.kind == TraceKind::CallbackStart &&
      trace.tasks().at(static_cast<std::size_t>(ev.task)).node != "publisher")
    {
      out.emplace_back(to_ns(ev.time), trace.tasks()[static_cast<std::size_t>(ev.task)].name, ev.seq);
    }
  }
  return out;
}

void ordering_golden(Check & check)
{
  {
    FiveEntityNode f;
    LocalPoolExecutor ex(f.tasks);
    Recorder rec(f.tasks);
    for (auto id : f.ids) {
      ex.spawn(id);
    }
    run_until_stalled(ex, f.tasks, rec);
    f.sample({1, 3});
    check.expect(f.queue(ex) == "B D ", "queue after first sampling is [B, D] (got " + f.queue(ex) + ")");
    f.sample({0, 1, 2});
    check.expect(f.queue(ex) == "B D A C ", "queue after second sampling is [B, D, A, C]");
    run_until_stalled(ex, f.tasks, rec);
    check.expect(rec.starts == std::vector<std::string>{"B1", "B2", "D1", "A1", "C1"},
      "execution order B1, B2, D, A, C");
  }
  for (const auto & [ready, expected] : std::vector<std::pair<std::vector<int>, std::string>>{
      {{0, 1, 2, 3, 4}, "{ACE} B D "}, {{1, 2, 3, 4}, "B {CE} D "}})
  {
    FiveEntityNode f;
    LocalPoolExecutor ex(f.tasks);
    Recorder rec(f.tasks);
    ex.spawn(f.tasks.join("ACE", {f.ids[0], f.ids[2], f.ids[4]}));
    ex.spawn(f.ids[1]);
    ex.spawn(f.ids[3]);
    run_until_stalled(ex, f.tasks, rec);
    for (int t : ready) {
      f.node.deliver({t, 1}, SimTime{});
    }
    f.node.spin_once(*f.ws, SimTime{}, [&f](TaskId t) { f.tasks.wake(t); });
    check.expect(f.queue(ex) == expected, "join queue " + expected + "(got " + f.queue(ex) + ")");
  }
  for (bool random_phase : {false, true}) {
    auto futures = table1_scenario();
    futures.duration = seconds(5);
    futures.random_phase = random_phase;
    futures.variant = VariantId{ExecutorModel::Futures, false};
    auto cpp = futures;
    cpp.variant = VariantId{ExecutorModel::RclcppSt, false};
    Simulation a(futures, 7);
    Simulation b(cpp, 7);
    a.run();
    b.run();
    const auto left = subscriber_callbacks(a);
    check.expect(!left.empty() && left == subscriber_callbacks(b),
      std::string("futures and rclcpp-st callback order identical") + (random_phase ? " (random phases)" : ""));
  }
}

// ------------------------------------------------------------------------ 5

class StarvationRig
{
public:
  StarvationRig()
  : rng_(0), sched_(events_, rng_, SchedulerConfig{2, Duration{0}, milliseconds(1), false}),
    hooks_(*this), pool_(tasks_)
  {
    pool_.set_unparker([this](ThreadId t) { sched_.make_ready(t); });
    for (int i = 0; i < 2; ++i) {
      auto & program = programs_.emplace_back(std::make_unique<Program>());
      const auto thread = sched_.create_thread(
        ThreadConfig{"pool" + std::to_string(i), SchedPolicy::Fifo, 20, {}}, *program);
      program->loop(std::make_unique<PoolWorkerDriver>(pool_, pool_.add_worker(thread), tasks_, hooks_));
    }
  }

  std::uint64_t third_task_starts(Duration horizon)
  {
    const auto busy1 = tasks_.add(std::make_unique<BusyTask>("busy1", 0, milliseconds(1)));
    const auto busy2 = tasks_.add(std::make_unique<BusyTask>("busy2", 1, milliseconds(1)));
    const auto third = tasks_.add(std::make_unique<ChannelTask>("third", channel_, milliseconds(1)));
    pool_.spawn(busy1);
    pool_.spawn(busy2);
    channel_.offer({2, 0});
    pool_.spawn(third);
    third_ = third;
    sched_.settle();
    while (const auto * next = events_.peek()) {
      if (next->at > SimTime{horizon}) {
        break;
      }
      const auto ev = *events_.advance();
      sched_.handle(ev);
      sched_.settle();
    }
    busy_polls_ = tasks_.get<BusyTask>(busy1).polls() + tasks_.get<BusyTask>(busy2).polls();
    return third_starts_;
  }

  std::uint64_t busy_polls() const { return busy_polls_; }

private:
  struct Hooks : ExecutionHooks
  {
    explicit Hooks(StarvationRig & r) : rig(r) {}
    void callback_start(TaskId task, const EntityEvent &, SimTime) override
    {
      if (task == rig.third_) {
        ++rig.third_starts_;
      }
    }
    void callback_end(TaskId, const EntityEvent &, SimTime) override {}
    StarvationRig & rig;
  };

  EventQueue events_;
  Rng rng_;
  OsScheduler sched_;
  TaskTable tasks_;
  Hooks hooks_;
  ThreadPoolExecutor pool_;
  EventChannel channel_;
  std::vector<std::unique_ptr<Program>> programs_;
  TaskId third_ = 0;
  std::uint64_t third_starts_ = 0;
  std::uint64_t busy_polls_ = 0;
};

void starvation_witness(Check & check)
{
  StarvationRig rig;
  const auto starts = rig.third_task_starts(seconds(10));
  check.expect(starts == 0, "third task never starts over 10 s (got " + std::to_string(starts) + ")");
  check.expect(rig.busy_polls() >= 19'000, "busy tasks keep both workers occupied");
}

// ------------------------------------------------------------------------ 6

ScenarioSpec blocked_consumer()
{
  auto spec = parse_scenario(
    "scenario:\n"
    "  name: blocked-consumer\n"
    "  variant: futures-rt\n"
    "  duration: 3s\n"
    "overheads:\n"
    "  dds_cost: 0ns\n"
    "topics:\n"
    "  - name: fast\n"
    "    period: 1ms\n"
    "nodes:\n"
    "  - name: subscriber\n"
    "callbacks:\n"
    "  - name: consumer\n"
    "    node: subscriber\n"
    "    topic: fast\n"
    "    demand: 100us\n"
    "    priority: 10\n"
    "loads:\n"
    "  - name: hog\n"
    "    policy: fifo\n"
    "    priority: 15\n"
    "    demand: 20ms\n"
    "    period: 1000ms\n");
  return spec;
}

struct ChannelOutcome
{
  std::uint64_t drops = 0;
  std::optional<std::uint64_t> first_drop_offer;  // 1-based
  bool dropped_never_run = true;
};

ChannelOutcome channel_outcome(const ScenarioSpec & spec)
{
  Simulation sim(spec, 0);
  sim.run();
  ChannelOutcome out;
  std::uint64_t offers = 0;
  std::set<std::int64_t> dropped;
  std::set<std::int64_t> started;
  const auto topic = *sim.trace().find_topic("fast");
  for (const auto & ev : sim.trace().events()) {
    if (ev.topic != topic || ev.task == kNoId ||
      sim.trace().tasks()[static_cast<std::size_t>(ev.task)].node == "publisher")
    {
      continue;
    }
    if (ev.kind == TraceKind::ChannelOffer || ev.kind == TraceKind::ChannelDrop) {
      ++offers;
    }
    if (ev.kind == TraceKind::ChannelDrop) {
      ++out.drops;
      dropped.insert(ev.seq);
      if (!out.first_drop_offer) {
        out.first_drop_offer = offers;
      }
    }
    if (ev.kind == TraceKind::CallbackStart) {
      started.insert(ev.seq);
    }
  }
  for (auto seq : dropped) {
    out.dropped_never_run = out.dropped_never_run && !started.count(seq);
  }
  return out;
}

void channel_semantics(Check & check)
{
  auto spec = blocked_consumer();
  check.expect(validate(spec).empty(), "blocked-consumer scenario is valid");
  check.expect(spec.callbacks[0].channel_capacity == 11, "default capacity 11");
  const auto before = channel_outcome(spec);
  check.expect(before.drops > 0, "drops recorded with capacity 11");
  check.expect(before.first_drop_offer == std::optional<std::uint64_t>{12},
    "first drop is the 12th offered event (got " +
    (before.first_drop_offer ? std::to_string(*before.first_drop_offer) : std::string("none")) + ")");
  check.expect(before.dropped_never_run, "dropped messages never reach the callback");

  // Overflowing eleven slots takes more than eleven periods of blocking, so
  // the default ten-period bound would call this response time unbounded.
  const auto rta = apply_channel_dimensioning(spec, 100);
  const auto * entry = rta.find("consumer");
  check.expect(entry && entry->response.value == microseconds(20'100), "consumer R = 20.1 ms");
  check.expect(spec.callbacks[0].channel_capacity == 21,
    "dimensioned capacity 21 (got " + std::to_string(spec.callbacks[0].channel_capacity) + ")");
  const auto after = channel_outcome(spec);
  check.expect(after.drops == 0, "no drops with the dimensioned capacity (got " + std::to_string(after.drops) + ")");
}

// ------------------------------------------------------------------------ 7

void dds_priority_effect(Check & check)
{
  auto high = table1_scenario();
  check.expect(high.overheads.dds_cost == microseconds(10), "DDS cost 10 us");
  check.expect(high.nodes[0].dds_priority > callback_priorities(high).front(), "DDS outranks callbacks");
  for (const auto & r : run_variant(high, 0).rows) {
    check.expect(r.verdict != Verdict::DeadlineMiss, "DDS above callbacks meets the " + r.chain + " deadline");
  }

  auto low = table1_scenario();
  low.nodes[0].dds_priority = 14;
  bool missed = false;
  for (const auto & r : run_variant(low, 0).rows) {
    missed = missed || r.verdict == Verdict::DeadlineMiss;
  }
  check.expect(missed, "DDS below callbacks misses a deadline");
}

// ------------------------------------------------------------------------ 8

void determinism(Check & check)
{
  const auto root = std::filesystem::temp_directory_path() / "r2rsim-acceptance-determinism";
  std::filesystem::remove_all(root);
  const auto stats_of = [&root](const std::string & sub) {
      RunRequest req;
      req.scenario = table1_scenario();
      req.variant = VariantId{ExecutorModel::Tokio, true};
      req.replications = 3;
      req.seed = 99;
      req.out_dir = root / sub;
      std::ostringstream log;
      const int status = r2rsim::run(req, log);
      std::ifstream in(root / sub / "stats.csv", std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      return std::make_pair(status, ss.str());
    };
  const auto first = stats_of("first");
  const auto second = stats_of("second");
  check.expect(first.first == 0 && second.first == 0, "both runs succeed");
  check.expect(!first.second.empty(), "stats.csv written");
  check.expect(first.second == second.second, "stats.csv byte-identical");
  std::filesystem::remove_all(root);
}

struct Criterion
{
  int number;
  const char * title;
  std::function<void (Check &)> body;
};

}  // namespace

int main(int argc, char ** argv)
{
  const std::vector<Criterion> criteria{
    {1, "RTA reproduction", rta_reproduction},
    {2, "oracle equivalence", oracle_equivalence},
    {3, "deadline verdicts", deadline_verdicts},
    {4, "ordering golden tests", ordering_golden},
    {5, "starvation witness", starvation_witness},
    {6, "channel semantics", channel_semantics},
    {7, "DDS-priority effect", dds_priority_effect},
    {8, "determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    selected.insert(std::atoi(argv[i]));
  }
  int failed = 0;
  for (const auto & c : criteria) {
    if (!selected.empty() && !selected.count(c.number)) {
      continue;
    }
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(check);
    } catch (const std::exception & e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    const auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (check.ok() ? "PASS" : "FAIL") << " criterion " << c.number << ": " << c.title
              << " (" << secs << " s)\n";
    for (const auto & f : check.failures()) {
      std::cout << "    " << f << "\n";
    }
    failed += check.ok() ? 0 : 1;
  }
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
