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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "r2rsim/metrics.hpp"
#include "r2rsim/rta.hpp"
#include "r2rsim/scenario.hpp"
#include "r2rsim/trace.hpp"

namespace r2rsim
{

struct EmitFlags
{
  bool trace = false;
  bool stats = true;
  bool report = true;
};

struct RunRequest
{
  ScenarioSpec scenario;
  std::optional<VariantId> variant;
  std::optional<Duration> duration;
  std::optional<std::size_t> replications;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = ".";
  EmitFlags emit;
  bool dimension_channels = false;
  std::int64_t divergence_factor = kDefaultDivergenceFactor;
  std::size_t jobs = 0;  // 0: one per hardware thread
};

struct VariantResult
{
  VariantId variant;
  std::vector<ChainSpec> chains;
  std::vector<StatsSummary> stats;
  std::vector<ComparisonRow> rows;
  RtaResult rta;
  std::vector<Trace> traces;  // only when requested
};

/// Scenario with the request's overrides applied.
ScenarioSpec effective_scenario(const RunRequest & req);

/// Runs spec.replications replications with seeds spec.seed + k.
VariantResult run_variant(const ScenarioSpec & spec, std::size_t jobs, bool keep_traces = false);

/// Return values are process exit codes.
int run(const RunRequest & req, std::ostream & log);
int matrix(const RunRequest & req, const std::vector<VariantId> & variants, std::ostream & log);
int analyze(
  const ScenarioSpec & spec, std::ostream & out, std::int64_t divergence_factor = kDefaultDivergenceFactor);

}  // namespace r2rsim
