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

#include <benchmark/benchmark.h>

#include "r2rsim/event_queue.hpp"
#include "r2rsim/rng.hpp"
#include "r2rsim/rta.hpp"
#include "r2rsim/scenario.hpp"
#include "r2rsim/simulation.hpp"

namespace
{

using r2rsim::Duration;

void BM_EventQueueChurn(benchmark::State & state)
{
  const auto depth = static_cast<std::size_t>(state.range(0));
  r2rsim::Rng rng(1);
  for (auto _ : state) {
    r2rsim::EventQueue q;
    for (std::size_t i = 0; i < depth; ++i) {
      q.schedule(r2rsim::at_ns(static_cast<std::int64_t>(rng.next_below(1'000'000))),
        r2rsim::EventKind::TimerFire, 0);
    }
    while (auto ev = q.advance()) {
      benchmark::DoNotOptimize(ev->seq);
    }
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * depth));
}
BENCHMARK(BM_EventQueueChurn)->Arg(1 << 10)->Arg(1 << 16);

void BM_ResponseTimeAnalysis(benchmark::State & state)
{
  const auto n = static_cast<std::size_t>(state.range(0));
  r2rsim::Rng rng(7);
  std::vector<r2rsim::RtTask> tasks;
  for (std::size_t i = 0; i < n; ++i) {
    const auto period = std::chrono::milliseconds(10 + rng.next_below(990));
    tasks.push_back(r2rsim::RtTask{"t" + std::to_string(i),
        Duration{period} / static_cast<std::int64_t>(n + 1), period, 0, std::nullopt});
  }
  tasks = r2rsim::rm_assign(tasks);
  for (auto _ : state) {
    benchmark::DoNotOptimize(r2rsim::analyze(tasks));
  }
}
BENCHMARK(BM_ResponseTimeAnalysis)->Arg(5)->Arg(50);

void BM_Table1Run(benchmark::State & state)
{
  auto spec = r2rsim::table1_scenario();
  spec.variant = r2rsim::all_variants().at(static_cast<std::size_t>(state.range(0)));
  spec.duration = std::chrono::seconds(2);
  spec.drain = std::chrono::milliseconds(500);
  for (auto _ : state) {
    auto sim = r2rsim::build_variant(spec, 0);
    sim->run();
    benchmark::DoNotOptimize(sim->trace().events().size());
  }
  state.SetLabel(r2rsim::to_string(spec.variant));
}
BENCHMARK(BM_Table1Run)->DenseRange(0, 8)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
