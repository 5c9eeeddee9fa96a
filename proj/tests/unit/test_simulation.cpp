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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "r2rsim/metrics.hpp"
#include "r2rsim/runner.hpp"
#include "r2rsim/simulation.hpp"

namespace r2rsim
{
namespace
{

using std::chrono::milliseconds;
using std::chrono::seconds;

ScenarioSpec table1(ExecutorModel model, bool nort = false, Duration duration = seconds(2))
{
  auto spec = table1_scenario();
  spec.variant = VariantId{model, nort};
  spec.duration = duration;
  return spec;
}

bool subscriber_side(const Trace & trace, const TraceEvent & ev)
{
  return ev.task == kNoId || trace.tasks().at(static_cast<std::size_t>(ev.task)).node != "publisher";
}

std::vector<ChainLatencies> chains_of(const Simulation & sim)
{
  return extract_latencies(sim.trace(), default_chains(sim.spec()));
}

std::string slurp(const std::filesystem::path & path)
{
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Simulation, ZeroOverheadRtMaximaEqualResponseTimes)
{
  for (auto model : {ExecutorModel::FuturesRt, ExecutorModel::RclcppRt}) {
    auto spec = table1(model, false, seconds(1));
    spec.overheads.dds_cost = Duration{0};
    SimulationOptions options;
    options.check_invariants = true;
    Simulation sim(spec, 0, options);
    sim.run();
    const auto rta = analyze(rta_tasks(spec));
    for (const auto & chain : chains_of(sim)) {
      Duration max{0};
      for (const auto & r : chain.records) {
        max = std::max(max, r.latency);
      }
      EXPECT_EQ(max, rta.find("callback" + chain.chain.substr(5))->response.value)
        << to_string(spec.variant) << " " << chain.chain;
    }
  }
}

TEST(Simulation, ConservationAndStageOrderInEveryVariant)
{
  for (bool nort : {false, true}) {
    for (auto v : all_variants(nort)) {
      auto spec = table1(v.model, v.nort);
      SimulationOptions options;
      options.check_invariants = true;
      Simulation sim(spec, 3, options);
      ASSERT_NO_THROW(sim.run()) << to_string(v);
      const auto & events = sim.trace().events();
      for (std::size_t i = 1; i < events.size(); ++i) {
        ASSERT_LE(events[i - 1].time, events[i].time) << to_string(v);
      }
      for (const auto & c : chains_of(sim)) {
        EXPECT_EQ(c.published, c.records.size() + c.channel_drops + c.qos_drops + c.in_flight)
          << to_string(v) << " " << c.chain;
        for (const auto & r : c.records) {
          EXPECT_GE(r.latency, Duration{0});
        }
      }
      // publish <= deliver <= sample <= start <= end per message.
      std::map<std::pair<std::int32_t, std::int64_t>, std::vector<std::pair<TraceKind, SimTime>>> stages;
      for (const auto & ev : events) {
        if (!subscriber_side(sim.trace(), ev)) {
          continue;
        }
        switch (ev.kind) {
          case TraceKind::Publish:
          case TraceKind::DdsDeliver:
          case TraceKind::Sample:
          case TraceKind::CallbackStart:
          case TraceKind::CallbackEnd:
            stages[{ev.topic, ev.seq}].emplace_back(ev.kind, ev.time);
            break;
          default:
            break;
        }
      }
      for (const auto & [key, seen] : stages) {
        const std::vector<TraceKind> order{TraceKind::Publish, TraceKind::DdsDeliver,
          TraceKind::Sample, TraceKind::CallbackStart, TraceKind::CallbackEnd};
        std::size_t stage = 0;
        for (const auto & [kind, t] : seen) {
          const auto pos = static_cast<std::size_t>(
            std::find(order.begin(), order.end(), kind) - order.begin());
          ASSERT_GE(pos, stage) << to_string(v) << " topic " << key.first << " seq " << key.second;
          stage = pos;
        }
      }
    }
  }
}

TEST(Simulation, CallbackThreadsExecuteExactlyTheirDemand)
{
  auto spec = table1(ExecutorModel::FuturesRt);
  Simulation sim(spec, 0);
  sim.run();
  std::map<std::int32_t, std::uint64_t> ends;
  for (const auto & ev : sim.trace().events()) {
    if (ev.kind == TraceKind::CallbackEnd) {
      ++ends[ev.task];
    }
  }
  for (const auto & cb : spec.callbacks) {
    const auto thread = sim.thread("subscriber/" + cb.name);
    ASSERT_TRUE(thread.has_value()) << cb.name;
    const auto task = sim.task_of(cb.name);
    ASSERT_TRUE(task.has_value());
    EXPECT_EQ(sim.scheduler().stats(*thread).executed,
      cb.demand * static_cast<std::int64_t>(ends[static_cast<std::int32_t>(*task)])) << cb.name;
  }
}

TEST(Simulation, PerTopicOrderIsPreserved)
{
  for (auto v : all_variants()) {
    Simulation sim(table1(v.model), 0);
    sim.run();
    std::map<std::int32_t, std::int64_t> last;
    for (const auto & ev : sim.trace().events()) {
      if (ev.kind != TraceKind::CallbackStart || !subscriber_side(sim.trace(), ev)) {
        continue;
      }
      const auto it = last.find(ev.topic);
      if (it != last.end()) {
        EXPECT_GT(ev.seq, it->second) << to_string(v);
      }
      last[ev.topic] = ev.seq;
    }
  }
}

TEST(Simulation, InterleavedLoopKeepsAtMostOneEventPerChannel)
{
  Simulation sim(table1(ExecutorModel::Futures), 0);
  sim.run();
  auto & node = sim.node("subscriber");
  for (EntityId e = 0; e < node.entity_count(); ++e) {
    EXPECT_LE(node.entity(e).channel.max_occupancy(), 1u) << node.entity(e).name;
  }
}

std::vector<std::tuple<std::int64_t, std::string, std::int64_t>> callback_order(const Simulation & sim)
{
  std::vector<std::tuple<std::int64_t, std::string, std::int64_t>> out;
  for (const auto & ev : sim.trace().events()) {
    if (ev.kind == TraceKind::CallbackStart && subscriber_side(sim.trace(), ev)) {
      out.emplace_back(to_ns(ev.time), sim.trace().topics().at(static_cast<std::size_t>(ev.topic)), ev.seq);
    }
  }
  return out;
}

TEST(Simulation, InterleavedFuturesMatchesCppSingleThreaded)
{
  for (std::uint64_t seed : {0u, 5u}) {
    auto futures = table1(ExecutorModel::Futures);
    auto cpp = table1(ExecutorModel::RclcppSt);
    futures.random_phase = cpp.random_phase = seed != 0;
    Simulation a(futures, seed);
    Simulation b(cpp, seed);
    a.run();
    b.run();
    const auto order = callback_order(a);
    EXPECT_GT(order.size(), 300u);
    EXPECT_EQ(order, callback_order(b)) << "seed " << seed;
  }
}

TEST(Simulation, SameSeedSameTrace)
{
  for (auto model : {ExecutorModel::Tokio, ExecutorModel::FuturesThreadPool}) {
    const auto spec = table1(model, true);
    const auto dump = [&spec] {
        Simulation sim(spec, 11);
        sim.run();
        std::ostringstream out;
        sim.trace().write_csv(out);
        sim.trace().write_thread_csv(out);
        return out.str();
      };
    EXPECT_EQ(dump(), dump());
  }
}

TEST(Simulation, SeedOnlyMattersForDefaultPolicyThreads)
{
  const auto p99_row = [](bool nort, std::uint64_t seed) {
      auto spec = table1(ExecutorModel::FuturesRt, nort);
      spec.seed = seed;
      spec.replications = 1;
      const auto result = run_variant(spec, 1);
      std::vector<double> out;
      for (const auto & s : result.stats) {
        out.push_back(*s.p99_ns);
      }
      return out;
    };
  EXPECT_EQ(p99_row(false, 1), p99_row(false, 2));
  EXPECT_NE(p99_row(true, 1), p99_row(true, 2));
  const auto rt = p99_row(false, 1);
  const auto nort = p99_row(true, 1);
  EXPECT_GT(nort.front(), rt.front());
}

TEST(Simulation, BackgroundLoadRunsAtItsPriority)
{
  auto spec = table1(ExecutorModel::FuturesRt, false, seconds(1));
  LoadSpec load;
  load.name = "hog";
  load.priority = 30;
  load.demand = milliseconds(3);
  load.period = milliseconds(100);
  spec.loads.push_back(load);
  Simulation sim(spec, 0);
  sim.run();
  EXPECT_EQ(sim.load("hog").completed(), 10u);
  EXPECT_EQ(sim.load("hog").completion_times().at(0), SimTime{milliseconds(3)});
}

class RunnerFixture : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir = std::filesystem::temp_directory_path() /
      ("r2rsim-test-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir);
  }

  void TearDown() override { std::filesystem::remove_all(dir); }

  RunRequest request(const std::string & sub) const
  {
    RunRequest req;
    req.scenario = table1_scenario();
    req.duration = seconds(1);
    req.replications = 2;
    req.seed = 4;
    req.out_dir = dir / sub;
    req.jobs = 1;
    return req;
  }

  std::filesystem::path dir;
  std::ostringstream log;
};

TEST_F(RunnerFixture, RunTwiceIsByteIdentical)
{
  auto a = request("a");
  auto b = request("b");
  a.variant = b.variant = VariantId{ExecutorModel::Tokio, true};
  a.emit.trace = b.emit.trace = true;
  ASSERT_EQ(run(a, log), 0);
  ASSERT_EQ(run(b, log), 0);
  for (const char * file : {"stats.csv", "report.txt", "report.csv", "trace-nort-tokio-4.csv"}) {
    const auto left = slurp(dir / "a" / file);
    EXPECT_FALSE(left.empty()) << file;
    EXPECT_EQ(left, slurp(dir / "b" / file)) << file;
  }
}

TEST_F(RunnerFixture, MatrixHasOneRowPerVariantAndTopic)
{
  const auto req = request("m");
  const std::vector<VariantId> variants{{ExecutorModel::Futures, false}, {ExecutorModel::Tokio, true}};
  ASSERT_EQ(matrix(req, variants, log), 0);
  std::istringstream csv(slurp(dir / "m" / "matrix.csv"));
  std::string line;
  std::size_t rows = 0;
  std::getline(csv, line);
  EXPECT_EQ(line, "variant,topic,p99_us,max_us,deadline_us,rta_us,verdict");
  while (std::getline(csv, line)) {
    ++rows;
  }
  EXPECT_EQ(rows, variants.size() * 5);
}

TEST_F(RunnerFixture, EmptyMatrixIsANoOp)
{
  EXPECT_EQ(matrix(request("e"), {}, log), 0);
  EXPECT_FALSE(std::filesystem::exists(dir / "e" / "matrix.csv"));
}

TEST_F(RunnerFixture, InvalidScenarioFailsWithDiagnostics)
{
  auto req = request("bad");
  req.scenario.callbacks[0].topic = "nowhere";
  EXPECT_NE(run(req, log), 0);
  EXPECT_NE(log.str().find("nowhere"), std::string::npos);
}

TEST(Analyze, ReportsResponseTimes)
{
  std::ostringstream out;
  EXPECT_EQ(analyze(table1_scenario(), out), 0);
  const auto text = out.str();
  EXPECT_NE(text.find("170.000"), std::string::npos);
  EXPECT_NE(text.find("utilization 0.90"), std::string::npos);

  auto overloaded = table1_scenario();
  overloaded.callbacks[0].demand = milliseconds(9);
  std::ostringstream over;
  analyze(overloaded, over);
  EXPECT_NE(over.str().find("exceeds 1"), std::string::npos);

  ScenarioSpec single;
  single.topics.push_back(TopicSpec{"t", milliseconds(10), Duration{0}});
  NodeSpec node;
  node.name = "n";
  single.nodes.push_back(node);
  CallbackSpec cb;
  cb.name = "only";
  cb.node = "n";
  cb.topic = "t";
  cb.demand = milliseconds(3);
  single.callbacks.push_back(cb);
  std::ostringstream one;
  EXPECT_EQ(analyze(single, one), 0);
  EXPECT_NE(one.str().find("3.000"), std::string::npos);
}

}  // namespace
}  // namespace r2rsim
