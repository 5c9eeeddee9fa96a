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
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "r2rsim/rta.hpp"
#include "r2rsim/scenario.hpp"
#include "r2rsim/time.hpp"
#include "r2rsim/trace.hpp"

namespace r2rsim
{

class TraceIntegrityError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct LatencyRecord
{
  std::string chain;
  std::int64_t seq = -1;  // of the head message
  Duration latency{0};
  std::vector<Duration> hops;  // callback end minus publication of its input
};

struct ChainLatencies
{
  std::string chain;
  std::vector<LatencyRecord> records;  // head publication order
  std::uint64_t published = 0;
  std::uint64_t channel_drops = 0;
  std::uint64_t qos_drops = 0;
  std::uint64_t in_flight = 0;  // neither finished nor dropped at the end
};

/// One single-hop chain per callback on a periodic topic, named after the
/// topic (or topic@node when several nodes subscribe).
std::vector<ChainSpec> default_chains(const ScenarioSpec & spec);

/// Follows every head publication through the chain's callbacks, using the
/// messages each callback published while it ran. Throws TraceIntegrityError
/// on a callback end without a matching start.
std::vector<ChainLatencies> extract_latencies(const Trace & trace, const std::vector<ChainSpec> & chains);

/// Nearest rank: the value at rank ceil(p / 100 * n) of the sorted values.
/// Throws std::invalid_argument for empty input or p outside (0, 100].
Duration percentile(std::vector<Duration> values, double p);

struct RunStats
{
  std::uint64_t published = 0;
  std::uint64_t count = 0;
  std::uint64_t channel_drops = 0;
  std::uint64_t qos_drops = 0;
  std::uint64_t in_flight = 0;
  std::optional<Duration> min;
  std::optional<double> mean_ns;
  std::optional<Duration> p50;
  std::optional<Duration> p99;
  std::optional<Duration> max;
};

/// Skips the first `warmup` completed records.
RunStats summarize_run(const ChainLatencies & chain, std::size_t warmup = 0);

struct StatsSummary
{
  std::string chain;
  std::size_t runs = 0;
  std::uint64_t published = 0;
  std::uint64_t count = 0;
  std::uint64_t channel_drops = 0;
  std::uint64_t qos_drops = 0;
  std::uint64_t in_flight = 0;
  std::optional<Duration> min;
  std::optional<double> mean_ns;
  std::optional<double> p50_ns;        // mean of per-run medians
  std::optional<double> p99_ns;        // mean of per-run 99th percentiles
  std::optional<double> p99_stddev_ns; // sample stddev of per-run 99th percentiles
  std::optional<Duration> max;
};

StatsSummary aggregate(const std::string & chain, const std::vector<RunStats> & runs);

enum class Verdict : std::uint8_t { WithinBound, DeadlineMiss, ExceedsRta };

std::string_view to_string(Verdict verdict) noexcept;

struct ComparisonRow
{
  std::string chain;
  Duration deadline{0};
  std::optional<Duration> max;
  std::optional<double> p99_ns;
  std::optional<Duration> rta;  // nullopt: not analysed or diverged
  Verdict verdict = Verdict::WithinBound;
};

/// Deadline is the head topic's period. A chain that lost messages or whose
/// max exceeds the deadline misses it; otherwise a max above the analysed
/// response time of the last callback exceeds the RTA.
std::vector<ComparisonRow> compare_to_rta(
  const ScenarioSpec & spec, const std::vector<ChainSpec> & chains,
  const std::vector<StatsSummary> & stats, const RtaResult & rta);

void write_stats_csv(std::ostream & out, const std::string & variant, const std::vector<StatsSummary> & stats,
  bool header = true);
void write_matrix_csv(std::ostream & out, const std::string & variant, const std::vector<ComparisonRow> & rows,
  bool header = true);
void write_report(std::ostream & out, const std::string & variant, const std::vector<ComparisonRow> & rows);
void write_rta_report(std::ostream & out, const RtaResult & rta);

}  // namespace r2rsim
