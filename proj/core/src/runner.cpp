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

#include "r2rsim/runner.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "r2rsim/simulation.hpp"

namespace r2rsim
{

namespace
{

struct Replication
{
  std::vector<RunStats> stats;  // per chain
  std::optional<Trace> trace;
};

Replication replicate(const ScenarioSpec & spec, const std::vector<ChainSpec> & chains,
  std::uint64_t seed, bool keep_trace)
{
  auto sim = build_variant(spec, seed);
  sim->run();
  Replication r;
  for (const auto & latencies : extract_latencies(sim->trace(), chains)) {
    r.stats.push_back(summarize_run(latencies, spec.warmup));
  }
  if (keep_trace) {
    r.trace = sim->trace();
  }
  return r;
}

bool report_violations(const ScenarioSpec & spec, std::ostream & log)
{
  const auto violations = validate(spec);
  if (violations.empty()) {
    return false;
  }
  fmt::print(log, "invalid scenario '{}':\n", spec.name);
  for (const auto & v : violations) {
    fmt::print(log, "  {}\n", v);
  }
  return true;
}

std::ofstream open_output(const std::filesystem::path & path)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  }
  return out;
}

void write_traces(const std::filesystem::path & dir, const VariantResult & result, std::uint64_t seed)
{
  const auto name = to_string(result.variant);
  for (std::size_t k = 0; k < result.traces.size(); ++k) {
    auto events = open_output(dir / fmt::format("trace-{}-{}.csv", name, seed + k));
    result.traces[k].write_csv(events);
    auto threads = open_output(dir / fmt::format("threads-{}-{}.csv", name, seed + k));
    result.traces[k].write_thread_csv(threads);
  }
}

}  // namespace

ScenarioSpec effective_scenario(const RunRequest & req)
{
  ScenarioSpec spec = req.scenario;
  if (req.variant) {
    spec.variant = *req.variant;
  }
  if (req.duration) {
    spec.duration = *req.duration;
  }
  if (req.replications) {
    spec.replications = *req.replications;
  }
  if (req.seed) {
    spec.seed = *req.seed;
  }
  if (req.dimension_channels && validate(spec).empty()) {
    apply_channel_dimensioning(spec, req.divergence_factor);
  }
  return spec;
}

VariantResult run_variant(const ScenarioSpec & spec, std::size_t jobs, bool keep_traces)
{
  VariantResult result;
  result.variant = spec.variant;
  result.chains = default_chains(spec);
  result.chains.insert(result.chains.end(), spec.chains.begin(), spec.chains.end());
  try {
    result.rta = analyze(rta_tasks(spec));
  } catch (const std::invalid_argument &) {
    result.rta = RtaResult{};  // priorities shared: compared against deadlines only
  }

  if (jobs == 0) {
    jobs = std::max(1u, std::thread::hardware_concurrency());
  }
  std::vector<Replication> reps(spec.replications);
  for (std::size_t first = 0; first < reps.size(); first += jobs) {
    const std::size_t last = std::min(reps.size(), first + jobs);
    std::vector<std::future<Replication>> batch;
    for (std::size_t k = first; k < last; ++k) {
      batch.push_back(std::async(std::launch::async, replicate, std::cref(spec),
        std::cref(result.chains), spec.seed + k, keep_traces));
    }
    for (std::size_t k = first; k < last; ++k) {
      reps[k] = batch[k - first].get();
    }
  }

  for (std::size_t c = 0; c < result.chains.size(); ++c) {
    std::vector<RunStats> per_run;
    for (const auto & r : reps) {
      per_run.push_back(r.stats[c]);
    }
    result.stats.push_back(aggregate(result.chains[c].name, per_run));
  }
  result.rows = compare_to_rta(spec, result.chains, result.stats, result.rta);
  if (keep_traces) {
    for (auto & r : reps) {
      result.traces.push_back(std::move(*r.trace));
    }
  }
  return result;
}

int run(const RunRequest & req, std::ostream & log)
{
  const auto spec = effective_scenario(req);
  if (report_violations(spec, log)) {
    return 2;
  }
  const auto result = run_variant(spec, req.jobs, req.emit.trace);
  const auto name = to_string(spec.variant);
  std::filesystem::create_directories(req.out_dir);
  if (req.emit.stats) {
    auto out = open_output(req.out_dir / "stats.csv");
    write_stats_csv(out, name, result.stats);
  }
  if (req.emit.report) {
    auto text = open_output(req.out_dir / "report.txt");
    write_report(text, name, result.rows);
    auto csv = open_output(req.out_dir / "report.csv");
    write_matrix_csv(csv, name, result.rows);
    write_report(log, name, result.rows);
  }
  if (req.emit.trace) {
    write_traces(req.out_dir, result, spec.seed);
  }
  return 0;
}

int matrix(const RunRequest & req, const std::vector<VariantId> & variants, std::ostream & log)
{
  if (variants.empty()) {
    return 0;
  }
  const auto base = effective_scenario(req);
  if (report_violations(base, log)) {
    return 2;
  }
  std::vector<VariantResult> results;
  for (const auto & v : variants) {
    auto spec = base;
    spec.variant = v;
    results.push_back(run_variant(spec, req.jobs, req.emit.trace));
  }
  std::filesystem::create_directories(req.out_dir);
  auto csv = open_output(req.out_dir / "matrix.csv");
  for (std::size_t i = 0; i < results.size(); ++i) {
    write_matrix_csv(csv, to_string(results[i].variant), results[i].rows, i == 0);
  }
  if (req.emit.stats) {
    auto out = open_output(req.out_dir / "stats.csv");
    for (std::size_t i = 0; i < results.size(); ++i) {
      write_stats_csv(out, to_string(results[i].variant), results[i].stats, i == 0);
    }
  }
  if (req.emit.report) {
    auto text = open_output(req.out_dir / "report.txt");
    for (const auto & r : results) {
      write_report(text, to_string(r.variant), r.rows);
      write_report(log, to_string(r.variant), r.rows);
      text << '\n';
    }
  }
  if (req.emit.trace) {
    for (const auto & r : results) {
      write_traces(req.out_dir, r, base.seed);
    }
  }
  return 0;
}

int analyze(const ScenarioSpec & spec, std::ostream & out, std::int64_t divergence_factor)
{
  if (report_violations(spec, out)) {
    return 2;
  }
  try {
    const auto result = analyze(rta_tasks(spec), divergence_factor);
    write_rta_report(out, result);
    return 0;
  } catch (const std::invalid_argument & e) {
    fmt::print(out, "cannot analyse '{}': {}\n", spec.name, e.what());
    return 2;
  }
}

}  // namespace r2rsim
