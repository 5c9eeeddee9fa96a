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

#include "r2rsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace r2rsim
{

namespace
{

using MessageKey = std::pair<std::int32_t, std::int64_t>;
using HandlingKey = std::tuple<std::int32_t, std::int32_t, std::int64_t>;  // task, topic, seq

std::int32_t resolve_hop(const Trace & trace, const ChainSpec & chain, const ChainHop & hop)
{
  const auto topic = trace.find_topic(hop.topic);
  if (topic) {
    const auto & tasks = trace.tasks();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].node == hop.node && tasks[i].source == *topic) {
        return static_cast<std::int32_t>(i);
      }
    }
  }
  throw std::invalid_argument(fmt::format(
            "chain '{}': no callback on {}:{} in the trace", chain.name, hop.node, hop.topic));
}

std::string us(double ns)
{
  return fmt::format("{:.3f}", ns / 1000.0);
}

std::string us(const std::optional<double> & ns)
{
  return ns ? us(*ns) : std::string();
}

std::string us(const std::optional<Duration> & d)
{
  return d ? us(static_cast<double>(d->count())) : std::string();
}

std::string ms(Duration d)
{
  return fmt::format("{:.3f}", static_cast<double>(d.count()) / 1e6);
}

}  // namespace

std::vector<ChainSpec> default_chains(const ScenarioSpec & spec)
{
  std::vector<ChainSpec> chains;
  for (const auto & cb : spec.callbacks) {
    const auto * topic = spec.find_topic(cb.topic);
    if (!topic || !topic->period) {
      continue;
    }
    const auto subscribers = std::count_if(spec.callbacks.begin(), spec.callbacks.end(),
        [&](const CallbackSpec & o) { return o.topic == cb.topic; });
    ChainSpec chain;
    chain.name = subscribers > 1 ? cb.topic + "@" + cb.node : cb.topic;
    chain.hops.push_back(ChainHop{cb.node, cb.topic});
    chains.push_back(std::move(chain));
  }
  return chains;
}

std::vector<ChainLatencies> extract_latencies(const Trace & trace, const std::vector<ChainSpec> & chains)
{
  std::map<MessageKey, SimTime> published_at;
  std::map<std::int32_t, std::vector<std::int64_t>> publications;  // topic -> seqs in order
  std::map<std::int32_t, MessageKey> open;                          // task -> input
  std::map<HandlingKey, SimTime> ended;
  std::map<HandlingKey, std::vector<MessageKey>> outputs;
  std::map<HandlingKey, TraceKind> dropped;

  for (const auto & ev : trace.events()) {
    switch (ev.kind) {
      case TraceKind::Publish: {
          published_at.emplace(MessageKey{ev.topic, ev.seq}, ev.time);
          publications[ev.topic].push_back(ev.seq);
          if (ev.task != kNoId) {
            if (const auto it = open.find(ev.task); it != open.end()) {
              outputs[HandlingKey{ev.task, it->second.first, it->second.second}].emplace_back(
                ev.topic, ev.seq);
            }
          }
          break;
        }
      case TraceKind::CallbackStart:
        if (!open.emplace(ev.task, MessageKey{ev.topic, ev.seq}).second) {
          throw TraceIntegrityError(fmt::format(
                    "task {} starts a callback at {} ns while another is running", ev.task,
                    to_ns(ev.time)));
        }
        break;
      case TraceKind::CallbackEnd: {
          const auto it = open.find(ev.task);
          if (it == open.end() || it->second != MessageKey{ev.topic, ev.seq}) {
            throw TraceIntegrityError(fmt::format(
                      "callback end without start: task {}, topic {}, seq {} at {} ns", ev.task,
                      ev.topic, ev.seq, to_ns(ev.time)));
          }
          open.erase(it);
          ended.emplace(HandlingKey{ev.task, ev.topic, ev.seq}, ev.time);
          break;
        }
      case TraceKind::ChannelDrop:
      case TraceKind::QosDrop:
        dropped.emplace(HandlingKey{ev.task, ev.topic, ev.seq}, ev.kind);
        break;
      default:
        break;
    }
  }

  std::vector<ChainLatencies> out;
  for (const auto & chain : chains) {
    ChainLatencies result;
    result.chain = chain.name;
    if (chain.hops.empty()) {
      out.push_back(std::move(result));
      continue;
    }
    std::vector<std::int32_t> hop_tasks;
    std::vector<std::int32_t> hop_topics;
    for (const auto & hop : chain.hops) {
      hop_tasks.push_back(resolve_hop(trace, chain, hop));
      hop_topics.push_back(*trace.find_topic(hop.topic));
    }
    const auto head = publications.find(hop_topics.front());
    if (head == publications.end()) {
      out.push_back(std::move(result));
      continue;
    }
    for (const auto seq : head->second) {
      ++result.published;
      MessageKey message{hop_topics.front(), seq};
      const SimTime start = published_at.at(message);
      LatencyRecord record{chain.name, seq, Duration{0}, {}};
      bool complete = true;
      for (std::size_t k = 0; k < hop_tasks.size(); ++k) {
        const HandlingKey handling{hop_tasks[k], message.first, message.second};
        const auto end = ended.find(handling);
        if (end == ended.end()) {
          const auto drop = dropped.find(handling);
          if (drop == dropped.end()) {
            ++result.in_flight;
          } else if (drop->second == TraceKind::ChannelDrop) {
            ++result.channel_drops;
          } else {
            ++result.qos_drops;
          }
          complete = false;
          break;
        }
        record.hops.push_back(end->second - published_at.at(message));
        record.latency = end->second - start;
        if (k + 1 == hop_tasks.size()) {
          break;
        }
        const auto outs = outputs.find(handling);
        const MessageKey * next = nullptr;
        if (outs != outputs.end()) {
          for (const auto & m : outs->second) {
            if (m.first == hop_topics[k + 1]) {
              next = &m;
              break;
            }
          }
        }
        if (!next) {
          ++result.in_flight;
          complete = false;
          break;
        }
        message = *next;
      }
      if (complete) {
        result.records.push_back(std::move(record));
      }
    }
    out.push_back(std::move(result));
  }
  return out;
}

Duration percentile(std::vector<Duration> values, double p)
{
  if (values.empty()) {
    throw std::invalid_argument("percentile of an empty sample");
  }
  if (!(p > 0.0 && p <= 100.0)) {
    throw std::invalid_argument("percentile rank must be in (0, 100]");
  }
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

RunStats summarize_run(const ChainLatencies & chain, std::size_t warmup)
{
  RunStats s;
  s.published = chain.published;
  s.channel_drops = chain.channel_drops;
  s.qos_drops = chain.qos_drops;
  s.in_flight = chain.in_flight;
  std::vector<Duration> values;
  for (std::size_t i = warmup; i < chain.records.size(); ++i) {
    values.push_back(chain.records[i].latency);
  }
  s.count = values.size();
  if (values.empty()) {
    return s;
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  double sum = 0.0;
  for (const auto v : values) {
    sum += static_cast<double>(v.count());
  }
  s.mean_ns = sum / static_cast<double>(values.size());
  s.p50 = percentile(values, 50.0);
  s.p99 = percentile(std::move(values), 99.0);
  return s;
}

StatsSummary aggregate(const std::string & chain, const std::vector<RunStats> & runs)
{
  StatsSummary out;
  out.chain = chain;
  out.runs = runs.size();
  double weighted = 0.0;
  std::vector<double> p50s;
  std::vector<double> p99s;
  for (const auto & r : runs) {
    out.published += r.published;
    out.count += r.count;
    out.channel_drops += r.channel_drops;
    out.qos_drops += r.qos_drops;
    out.in_flight += r.in_flight;
    if (r.count == 0) {
      continue;
    }
    out.min = out.min ? std::min(*out.min, *r.min) : *r.min;
    out.max = out.max ? std::max(*out.max, *r.max) : *r.max;
    weighted += *r.mean_ns * static_cast<double>(r.count);
    p50s.push_back(static_cast<double>(r.p50->count()));
    p99s.push_back(static_cast<double>(r.p99->count()));
  }
  if (out.count == 0) {
    return out;
  }
  const auto mean = [](const std::vector<double> & v) {
      double s = 0.0;
      for (const auto x : v) {
        s += x;
      }
      return s / static_cast<double>(v.size());
    };
  out.mean_ns = weighted / static_cast<double>(out.count);
  out.p50_ns = mean(p50s);
  out.p99_ns = mean(p99s);
  double ss = 0.0;
  for (const auto x : p99s) {
    ss += (x - *out.p99_ns) * (x - *out.p99_ns);
  }
  out.p99_stddev_ns = p99s.size() > 1 ? std::sqrt(ss / static_cast<double>(p99s.size() - 1)) : 0.0;
  return out;
}

std::string_view to_string(Verdict verdict) noexcept
{
  switch (verdict) {
    case Verdict::WithinBound: return "within-bound";
    case Verdict::DeadlineMiss: return "deadline-miss";
    case Verdict::ExceedsRta: return "exceeds-rta";
  }
  return "?";
}

std::vector<ComparisonRow> compare_to_rta(
  const ScenarioSpec & spec, const std::vector<ChainSpec> & chains,
  const std::vector<StatsSummary> & stats, const RtaResult & rta)
{
  std::vector<ComparisonRow> rows;
  for (const auto & chain : chains) {
    ComparisonRow row;
    row.chain = chain.name;
    if (chain.hops.empty()) {
      continue;
    }
    if (const auto * head = spec.find_topic(chain.hops.front().topic); head && head->period) {
      row.deadline = *head->period;
    }
    const auto & last = chain.hops.back();
    for (const auto & cb : spec.callbacks) {
      if (cb.node == last.node && cb.topic == last.topic) {
        if (const auto * entry = rta.find(cb.name); entry && entry->response.converged) {
          row.rta = entry->response.value;
        }
      }
    }
    const auto it = std::find_if(stats.begin(), stats.end(), [&](const StatsSummary & s) {
        return s.chain == chain.name;
      });
    bool lost = false;
    if (it != stats.end()) {
      row.max = it->max;
      row.p99_ns = it->p99_ns;
      lost = it->channel_drops + it->qos_drops > 0;
    }
    if (lost || (row.max && row.deadline > Duration{0} && *row.max > row.deadline)) {
      row.verdict = Verdict::DeadlineMiss;
    } else if (row.max && (!row.rta || *row.max > *row.rta)) {
      row.verdict = Verdict::ExceedsRta;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_stats_csv(
  std::ostream & out, const std::string & variant, const std::vector<StatsSummary> & stats, bool header)
{
  if (header) {
    out << "variant,chain,runs,published,count,channel_drops,qos_drops,in_flight,"
      "min_us,mean_us,p50_us,p99_us,p99_stddev_us,max_us\n";
  }
  for (const auto & s : stats) {
    fmt::print(out, "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", variant, s.chain, s.runs,
      s.published, s.count, s.channel_drops, s.qos_drops, s.in_flight, us(s.min), us(s.mean_ns),
      us(s.p50_ns), us(s.p99_ns), us(s.p99_stddev_ns), us(s.max));
  }
}

void write_matrix_csv(
  std::ostream & out, const std::string & variant, const std::vector<ComparisonRow> & rows, bool header)
{
  if (header) {
    out << "variant,topic,p99_us,max_us,deadline_us,rta_us,verdict\n";
  }
  for (const auto & r : rows) {
    fmt::print(out, "{},{},{},{},{},{},{}\n", variant, r.chain, us(r.p99_ns), us(r.max),
      us(std::optional<Duration>(r.deadline)), us(r.rta), to_string(r.verdict));
  }
}

void write_report(std::ostream & out, const std::string & variant, const std::vector<ComparisonRow> & rows)
{
  fmt::print(out, "variant {}\n", variant);
  fmt::print(out, "{:<16} {:>12} {:>12} {:>12} {:>12}  {}\n", "chain", "p99 [ms]", "max [ms]",
    "deadline", "RTA [ms]", "verdict");
  for (const auto & r : rows) {
    const auto opt_ms = [](const std::optional<Duration> & d) {
        return d ? ms(*d) : std::string("-");
      };
    fmt::print(out, "{:<16} {:>12} {:>12} {:>12} {:>12}  {}\n", r.chain,
      r.p99_ns ? fmt::format("{:.3f}", *r.p99_ns / 1e6) : std::string("-"), opt_ms(r.max),
      ms(r.deadline), opt_ms(r.rta), to_string(r.verdict));
  }
}

void write_rta_report(std::ostream & out, const RtaResult & rta)
{
  fmt::print(out, "{:<16} {:>10} {:>10} {:>9} {:>10} {:>9}  {}\n", "task", "C [ms]", "T [ms]",
    "priority", "R [ms]", "capacity", "verdict");
  for (const auto & e : rta.entries) {
    fmt::print(out, "{:<16} {:>10} {:>10} {:>9} {:>10} {:>9}  {}\n", e.task.id, ms(e.task.wcet),
      ms(e.task.period), e.task.priority,
      e.response.converged ? ms(e.response.value) : std::string("diverged"),
      e.channel_capacity ? std::to_string(*e.channel_capacity) : std::string("unbounded"),
      e.schedulable ? "schedulable" : "unschedulable");
  }
  fmt::print(out, "utilization {:.2f}{}\n", rta.utilization,
    rta.utilization > 1.0 ? " (exceeds 1)" : "");
  fmt::print(out, "{}\n", rta.schedulable ? "schedulable" : "not schedulable");
}

}  // namespace r2rsim
