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

#include "r2rsim/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace r2rsim
{

namespace
{

struct ModelName
{
  ExecutorModel model;
  std::string_view name;
};

constexpr std::array<ModelName, 9> kModelNames{{
  {ExecutorModel::Futures, "futures"},
  {ExecutorModel::FuturesJoin, "futures-join"},
  {ExecutorModel::FuturesRt, "futures-rt"},
  {ExecutorModel::FuturesThreadPool, "futures-thread-pool"},
  {ExecutorModel::Futures2Threads, "futures-2-threads"},
  {ExecutorModel::RclcppRt, "rclcpp-rt"},
  {ExecutorModel::RclcppSt, "rclcpp-st"},
  {ExecutorModel::Tokio, "tokio"},
  {ExecutorModel::TokioRt, "tokio-rt"},
}};

constexpr std::string_view kNortPrefix = "nort-";

struct Unit
{
  std::string_view suffix;
  std::int64_t ns;
};

// Longest suffix first so that "ms" is not read as "s".
constexpr std::array<Unit, 4> kUnits{{{"ns", 1}, {"us", 1'000}, {"ms", 1'000'000}, {"s", 1'000'000'000}}};

std::string_view policy_name(SchedPolicy p)
{
  return p == SchedPolicy::Fifo ? "fifo" : "other";
}

// ------------------------------------------------------------------ parsing

std::string where(const YAML::Node & node)
{
  const auto mark = node.Mark();
  if (mark.is_null()) {
    return "";
  }
  return fmt::format(" (line {})", mark.line + 1);
}

void check_keys(const YAML::Node & node, std::string_view context, std::initializer_list<std::string_view> allowed)
{
  if (!node.IsMap()) {
    throw ScenarioError(fmt::format("{} must be a mapping{}", context, where(node)));
  }
  for (const auto & kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ScenarioError(fmt::format("unknown key '{}' in {}{}", key, context, where(kv.first)));
    }
  }
}

template<typename T>
void read(const YAML::Node & node, const char * key, T & out)
{
  const auto value = node[key];
  if (!value) {
    return;
  }
  try {
    if constexpr (std::is_same_v<T, Duration>) {
      out = parse_duration(value.as<std::string>());
    } else if constexpr (std::is_same_v<T, std::optional<Duration>>) {
      out = parse_duration(value.as<std::string>());
    } else if constexpr (std::is_same_v<T, std::optional<int>>) {
      out = value.as<int>();
    } else {
      out = value.as<T>();
    }
  } catch (const YAML::Exception &) {
    throw ScenarioError(fmt::format("bad value for '{}'{}", key, where(value)));
  } catch (const std::invalid_argument & e) {
    throw ScenarioError(fmt::format("bad value for '{}'{}: {}", key, where(value), e.what()));
  }
}

std::string required_name(const YAML::Node & node, std::string_view context)
{
  const auto value = node["name"];
  if (!value || !value.IsScalar() || value.as<std::string>().empty()) {
    throw ScenarioError(fmt::format("{} needs a name{}", context, where(node)));
  }
  return value.as<std::string>();
}

YAML::Node sequence(const YAML::Node & root, const char * key)
{
  const auto node = root[key];
  if (node && !node.IsSequence()) {
    throw ScenarioError(fmt::format("'{}' must be a list{}", key, where(node)));
  }
  return node;
}

SchedPolicy parse_policy(const YAML::Node & node)
{
  const auto text = node.as<std::string>();
  if (text == "fifo") {
    return SchedPolicy::Fifo;
  }
  if (text == "other") {
    return SchedPolicy::Other;
  }
  throw ScenarioError(fmt::format("unknown policy '{}'{}", text, where(node)));
}

ChainHop parse_hop(const YAML::Node & node)
{
  const auto text = node.as<std::string>();
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw ScenarioError(fmt::format("chain hop '{}' is not node:topic{}", text, where(node)));
  }
  return ChainHop{text.substr(0, colon), text.substr(colon + 1)};
}

// -------------------------------------------------------------- serializing

void emit_duration(YAML::Emitter & out, const char * key, Duration d)
{
  out << YAML::Key << key << YAML::Value << format_duration(d);
}

std::vector<const CallbackSpec *> upstream_of(const ScenarioSpec & spec, std::string_view topic)
{
  std::vector<const CallbackSpec *> out;
  for (const auto & cb : spec.callbacks) {
    if (std::find(cb.publishes.begin(), cb.publishes.end(), topic) != cb.publishes.end()) {
      out.push_back(&cb);
    }
  }
  return out;
}

std::optional<Duration> callback_period_depth(
  const ScenarioSpec & spec, const CallbackSpec & cb, std::size_t depth)
{
  const auto * topic = spec.find_topic(cb.topic);
  if (!topic) {
    return std::nullopt;
  }
  if (topic->period) {
    return topic->period;
  }
  if (depth > spec.callbacks.size()) {
    return std::nullopt;  // publication cycle
  }
  std::optional<Duration> best;
  for (const auto * up : upstream_of(spec, cb.topic)) {
    const auto p = callback_period_depth(spec, *up, depth + 1);
    if (p && (!best || *p < *best)) {
      best = p;
    }
  }
  return best;
}

bool fifo_range(int priority)
{
  return priority >= kMinFifoPriority && priority <= kMaxFifoPriority;
}

}  // namespace

// ----------------------------------------------------------------- variants

std::string to_string(VariantId variant)
{
  for (const auto & m : kModelNames) {
    if (m.model == variant.model) {
      return (variant.nort ? std::string(kNortPrefix) : std::string()) + std::string(m.name);
    }
  }
  return "?";
}

std::optional<VariantId> parse_variant(std::string_view text)
{
  VariantId out;
  if (text.substr(0, kNortPrefix.size()) == kNortPrefix) {
    out.nort = true;
    text.remove_prefix(kNortPrefix.size());
  }
  for (const auto & m : kModelNames) {
    if (m.name == text) {
      out.model = m.model;
      return out;
    }
  }
  return std::nullopt;
}

std::vector<VariantId> all_variants(bool nort)
{
  std::vector<VariantId> out;
  for (const auto & m : kModelNames) {
    out.push_back(VariantId{m.model, nort});
  }
  return out;
}

Duration parse_duration(std::string_view text)
{
  for (const auto & unit : kUnits) {
    if (text.size() <= unit.suffix.size() ||
      text.substr(text.size() - unit.suffix.size()) != unit.suffix)
    {
      continue;
    }
    const auto digits = text.substr(0, text.size() - unit.suffix.size());
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || value < 0) {
      break;
    }
    if (value > std::numeric_limits<std::int64_t>::max() / unit.ns) {
      throw std::invalid_argument(fmt::format("duration '{}' overflows", text));
    }
    return Duration{value * unit.ns};
  }
  throw std::invalid_argument(
          fmt::format("'{}' is not a duration (integer with ns, us, ms or s)", text));
}

std::string format_duration(Duration d)
{
  const auto ns = d.count();
  for (auto it = kUnits.rbegin(); it != kUnits.rend(); ++it) {
    if (ns != 0 && ns % it->ns == 0) {
      return fmt::format("{}{}", ns / it->ns, it->suffix);
    }
  }
  return fmt::format("{}ns", ns);
}

// --------------------------------------------------------------------- spec

const TopicSpec * ScenarioSpec::find_topic(std::string_view n) const
{
  const auto it = std::find_if(topics.begin(), topics.end(), [&](const auto & t) { return t.name == n; });
  return it == topics.end() ? nullptr : &*it;
}

const NodeSpec * ScenarioSpec::find_node(std::string_view n) const
{
  const auto it = std::find_if(nodes.begin(), nodes.end(), [&](const auto & t) { return t.name == n; });
  return it == nodes.end() ? nullptr : &*it;
}

const CallbackSpec * ScenarioSpec::find_callback(std::string_view n) const
{
  const auto it =
    std::find_if(callbacks.begin(), callbacks.end(), [&](const auto & t) { return t.name == n; });
  return it == callbacks.end() ? nullptr : &*it;
}

ScenarioSpec parse_scenario(std::string_view text)
{
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception & e) {
    throw ScenarioError(fmt::format("malformed scenario: {}", e.what()));
  }
  ScenarioSpec spec;
  if (root.IsNull()) {
    return spec;
  }
  check_keys(root, "scenario file",
    {"scenario", "publisher", "overheads", "topics", "nodes", "callbacks", "loads", "chains"});

  if (const auto s = root["scenario"]) {
    check_keys(s, "scenario",
      {"name", "variant", "duration", "drain", "replications", "seed", "cores", "random_phase",
        "warmup"});
    read(s, "name", spec.name);
    if (const auto v = s["variant"]) {
      const auto parsed = parse_variant(v.as<std::string>());
      if (!parsed) {
        throw ScenarioError(fmt::format("unknown variant '{}'{}", v.as<std::string>(), where(v)));
      }
      spec.variant = *parsed;
    }
    read(s, "duration", spec.duration);
    read(s, "drain", spec.drain);
    read(s, "replications", spec.replications);
    read(s, "seed", spec.seed);
    read(s, "cores", spec.cores);
    read(s, "random_phase", spec.random_phase);
    read(s, "warmup", spec.warmup);
  }
  if (const auto p = root["publisher"]) {
    check_keys(p, "publisher", {"main_priority", "dds_priority", "worker_priority", "publish_cost"});
    read(p, "main_priority", spec.publisher.main_priority);
    read(p, "dds_priority", spec.publisher.dds_priority);
    read(p, "worker_priority", spec.publisher.worker_priority);
    read(p, "publish_cost", spec.publisher.publish_cost);
  }
  if (const auto o = root["overheads"]) {
    check_keys(o, "overheads",
      {"context_switch", "dds_cost", "transport_delay", "take_cost", "poll_cost", "other_quantum",
        "rta_inflation"});
    auto & oh = spec.overheads;
    read(o, "context_switch", oh.context_switch);
    read(o, "dds_cost", oh.dds_cost);
    read(o, "transport_delay", oh.transport_delay);
    read(o, "take_cost", oh.take_cost);
    read(o, "poll_cost", oh.poll_cost);
    read(o, "other_quantum", oh.other_quantum);
    read(o, "rta_inflation", oh.rta_inflation);
  }
  for (const auto & t : sequence(root, "topics")) {
    check_keys(t, "topic", {"name", "period", "phase"});
    TopicSpec topic;
    topic.name = required_name(t, "topic");
    read(t, "period", topic.period);
    read(t, "phase", topic.phase);
    spec.topics.push_back(std::move(topic));
  }
  for (const auto & n : sequence(root, "nodes")) {
    check_keys(n, "node",
      {"name", "main_priority", "dds_priority", "callback_priority", "pool_workers",
        "join_workers", "tokio_workers", "tokio_rt_priority"});
    NodeSpec node;
    node.name = required_name(n, "node");
    read(n, "main_priority", node.main_priority);
    read(n, "dds_priority", node.dds_priority);
    read(n, "callback_priority", node.callback_priority);
    read(n, "pool_workers", node.pool_workers);
    read(n, "join_workers", node.join_workers);
    read(n, "tokio_workers", node.tokio_workers);
    read(n, "tokio_rt_priority", node.tokio_rt_priority);
    spec.nodes.push_back(std::move(node));
  }
  for (const auto & c : sequence(root, "callbacks")) {
    check_keys(c, "callback",
      {"name", "node", "topic", "demand", "publishes", "channel_capacity", "qos_depth", "priority"});
    CallbackSpec cb;
    cb.name = required_name(c, "callback");
    read(c, "node", cb.node);
    read(c, "topic", cb.topic);
    read(c, "demand", cb.demand);
    if (const auto pubs = c["publishes"]) {
      if (!pubs.IsSequence()) {
        throw ScenarioError(fmt::format("'publishes' must be a list{}", where(pubs)));
      }
      for (const auto & topic : pubs) {
        cb.publishes.push_back(topic.as<std::string>());
      }
    }
    read(c, "channel_capacity", cb.channel_capacity);
    read(c, "qos_depth", cb.qos_depth);
    read(c, "priority", cb.priority);
    spec.callbacks.push_back(std::move(cb));
  }
  for (const auto & l : sequence(root, "loads")) {
    check_keys(l, "load", {"name", "policy", "priority", "demand", "period", "phase"});
    LoadSpec load;
    load.name = required_name(l, "load");
    if (const auto policy = l["policy"]) {
      load.policy = parse_policy(policy);
    }
    read(l, "priority", load.priority);
    read(l, "demand", load.demand);
    read(l, "period", load.period);
    read(l, "phase", load.phase);
    spec.loads.push_back(std::move(load));
  }
  for (const auto & c : sequence(root, "chains")) {
    check_keys(c, "chain", {"name", "hops"});
    ChainSpec chain;
    chain.name = required_name(c, "chain");
    for (const auto & hop : sequence(c, "hops")) {
      chain.hops.push_back(parse_hop(hop));
    }
    spec.chains.push_back(std::move(chain));
  }
  return spec;
}

ScenarioSpec load_scenario(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ScenarioError(fmt::format("cannot open scenario file '{}'", path));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioSpec & spec)
{
  YAML::Emitter out;
  out << YAML::BeginMap;

  out << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << spec.name;
  out << YAML::Key << "variant" << YAML::Value << to_string(spec.variant);
  emit_duration(out, "duration", spec.duration);
  emit_duration(out, "drain", spec.drain);
  out << YAML::Key << "replications" << YAML::Value << spec.replications;
  out << YAML::Key << "seed" << YAML::Value << spec.seed;
  out << YAML::Key << "cores" << YAML::Value << spec.cores;
  out << YAML::Key << "random_phase" << YAML::Value << spec.random_phase;
  out << YAML::Key << "warmup" << YAML::Value << spec.warmup;
  out << YAML::EndMap;

  out << YAML::Key << "publisher" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "main_priority" << YAML::Value << spec.publisher.main_priority;
  out << YAML::Key << "dds_priority" << YAML::Value << spec.publisher.dds_priority;
  out << YAML::Key << "worker_priority" << YAML::Value << spec.publisher.worker_priority;
  emit_duration(out, "publish_cost", spec.publisher.publish_cost);
  out << YAML::EndMap;

  const auto & oh = spec.overheads;
  out << YAML::Key << "overheads" << YAML::Value << YAML::BeginMap;
  emit_duration(out, "context_switch", oh.context_switch);
  emit_duration(out, "dds_cost", oh.dds_cost);
  emit_duration(out, "transport_delay", oh.transport_delay);
  emit_duration(out, "take_cost", oh.take_cost);
  emit_duration(out, "poll_cost", oh.poll_cost);
  emit_duration(out, "other_quantum", oh.other_quantum);
  emit_duration(out, "rta_inflation", oh.rta_inflation);
  out << YAML::EndMap;

  out << YAML::Key << "topics" << YAML::Value << YAML::BeginSeq;
  for (const auto & t : spec.topics) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << t.name;
    if (t.period) {
      emit_duration(out, "period", *t.period);
    }
    emit_duration(out, "phase", t.phase);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
  for (const auto & n : spec.nodes) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << n.name;
    out << YAML::Key << "main_priority" << YAML::Value << n.main_priority;
    out << YAML::Key << "dds_priority" << YAML::Value << n.dds_priority;
    out << YAML::Key << "callback_priority" << YAML::Value << n.callback_priority;
    out << YAML::Key << "pool_workers" << YAML::Value << n.pool_workers;
    out << YAML::Key << "join_workers" << YAML::Value << n.join_workers;
    out << YAML::Key << "tokio_workers" << YAML::Value << n.tokio_workers;
    out << YAML::Key << "tokio_rt_priority" << YAML::Value << n.tokio_rt_priority;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "callbacks" << YAML::Value << YAML::BeginSeq;
  for (const auto & c : spec.callbacks) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << c.name;
    out << YAML::Key << "node" << YAML::Value << c.node;
    out << YAML::Key << "topic" << YAML::Value << c.topic;
    emit_duration(out, "demand", c.demand);
    if (!c.publishes.empty()) {
      out << YAML::Key << "publishes" << YAML::Value << YAML::Flow << c.publishes;
    }
    out << YAML::Key << "channel_capacity" << YAML::Value << c.channel_capacity;
    out << YAML::Key << "qos_depth" << YAML::Value << c.qos_depth;
    if (c.priority) {
      out << YAML::Key << "priority" << YAML::Value << *c.priority;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  if (!spec.loads.empty()) {
    out << YAML::Key << "loads" << YAML::Value << YAML::BeginSeq;
    for (const auto & l : spec.loads) {
      out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << l.name;
      out << YAML::Key << "policy" << YAML::Value << std::string(policy_name(l.policy));
      out << YAML::Key << "priority" << YAML::Value << l.priority;
      emit_duration(out, "demand", l.demand);
      emit_duration(out, "period", l.period);
      emit_duration(out, "phase", l.phase);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }

  if (!spec.chains.empty()) {
    out << YAML::Key << "chains" << YAML::Value << YAML::BeginSeq;
    for (const auto & c : spec.chains) {
      std::vector<std::string> hops;
      for (const auto & h : c.hops) {
        hops.push_back(h.node + ":" + h.topic);
      }
      out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << c.name;
      out << YAML::Key << "hops" << YAML::Value << YAML::Flow << hops;
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

// --------------------------------------------------------------- validation

std::vector<std::string> validate(const ScenarioSpec & spec)
{
  std::vector<std::string> v;
  const auto check_priority = [&](int p, const std::string & what) {
      if (!fifo_range(p)) {
        v.push_back(fmt::format("{}: priority {} outside [{}, {}]", what, p, kMinFifoPriority,
          kMaxFifoPriority));
      }
    };
  const auto check_unique = [&](std::set<std::string> & seen, const std::string & name,
      std::string_view kind) {
      if (!seen.insert(name).second) {
        v.push_back(fmt::format("duplicate {} '{}'", kind, name));
      }
    };

  if (spec.duration <= Duration{0}) {
    v.push_back("duration must be positive");
  }
  if (spec.drain < Duration{0}) {
    v.push_back("drain must not be negative");
  }
  if (spec.replications < 1) {
    v.push_back("replications must be at least 1");
  }
  if (spec.cores < 1) {
    v.push_back("cores must be at least 1");
  }
  check_priority(spec.publisher.main_priority, "publisher main thread");
  check_priority(spec.publisher.dds_priority, "publisher dds thread");
  check_priority(spec.publisher.worker_priority, "publisher worker");
  if (spec.publisher.publish_cost < Duration{0}) {
    v.push_back("publish_cost must not be negative");
  }
  const auto & oh = spec.overheads;
  for (const auto & [name, d] : std::initializer_list<std::pair<const char *, Duration>>{
      {"context_switch", oh.context_switch}, {"dds_cost", oh.dds_cost},
      {"transport_delay", oh.transport_delay}, {"take_cost", oh.take_cost},
      {"poll_cost", oh.poll_cost}, {"rta_inflation", oh.rta_inflation}})
  {
    if (d < Duration{0}) {
      v.push_back(fmt::format("{} must not be negative", name));
    }
  }
  if (oh.other_quantum <= Duration{0}) {
    v.push_back("other_quantum must be positive");
  }

  std::set<std::string> seen;
  for (const auto & t : spec.topics) {
    check_unique(seen, t.name, "topic");
    if (t.period && *t.period <= Duration{0}) {
      v.push_back(fmt::format("topic '{}': period must be positive", t.name));
    }
    if (t.phase < Duration{0}) {
      v.push_back(fmt::format("topic '{}': phase must not be negative", t.name));
    }
  }
  seen.clear();
  for (const auto & n : spec.nodes) {
    check_unique(seen, n.name, "node");
    check_priority(n.main_priority, "node '" + n.name + "' main thread");
    check_priority(n.dds_priority, "node '" + n.name + "' dds thread");
    check_priority(n.callback_priority, "node '" + n.name + "' callback threads");
    check_priority(n.tokio_rt_priority, "node '" + n.name + "' tokio-rt workers");
    if (n.pool_workers < 1 || n.join_workers < 1 || n.tokio_workers < 1) {
      v.push_back(fmt::format("node '{}': worker counts must be at least 1", n.name));
    }
  }
  seen.clear();
  std::set<std::pair<std::string, std::string>> subscriptions;
  for (const auto & c : spec.callbacks) {
    check_unique(seen, c.name, "callback");
    const std::string what = "callback '" + c.name + "'";
    if (!spec.find_node(c.node)) {
      v.push_back(fmt::format("{}: unknown node '{}'", what, c.node));
    }
    if (!spec.find_topic(c.topic)) {
      v.push_back(fmt::format("{}: unknown topic '{}'", what, c.topic));
    }
    if (!subscriptions.emplace(c.node, c.topic).second) {
      v.push_back(fmt::format("{}: node '{}' already subscribes to '{}'", what, c.node, c.topic));
    }
    if (c.demand <= Duration{0}) {
      v.push_back(fmt::format("{}: demand must be positive", what));
    }
    if (c.channel_capacity < 1) {
      v.push_back(fmt::format("{}: channel capacity must be at least 1", what));
    }
    if (c.qos_depth < 1) {
      v.push_back(fmt::format("{}: qos depth must be at least 1", what));
    }
    for (const auto & p : c.publishes) {
      if (!spec.find_topic(p)) {
        v.push_back(fmt::format("{}: publishes unknown topic '{}'", what, p));
      }
    }
    if (c.priority) {
      check_priority(*c.priority, what);
    }
  }
  if (v.empty()) {
    const auto prios = callback_priorities(spec);
    for (std::size_t i = 0; i < prios.size(); ++i) {
      check_priority(prios[i], "callback '" + spec.callbacks[i].name + "' thread");
    }
  }
  seen.clear();
  for (const auto & l : spec.loads) {
    check_unique(seen, l.name, "load");
    if (l.policy == SchedPolicy::Fifo) {
      check_priority(l.priority, "load '" + l.name + "'");
    }
    if (l.demand <= Duration{0} || l.period <= Duration{0}) {
      v.push_back(fmt::format("load '{}': demand and period must be positive", l.name));
    }
    if (l.phase < Duration{0}) {
      v.push_back(fmt::format("load '{}': phase must not be negative", l.name));
    }
  }
  seen.clear();
  for (const auto & c : spec.chains) {
    check_unique(seen, c.name, "chain");
    if (c.hops.empty()) {
      v.push_back(fmt::format("chain '{}' has no hops", c.name));
    }
    const CallbackSpec * prev = nullptr;
    for (const auto & hop : c.hops) {
      const auto it = std::find_if(spec.callbacks.begin(), spec.callbacks.end(), [&](const auto & cb) {
          return cb.node == hop.node && cb.topic == hop.topic;
        });
      if (it == spec.callbacks.end()) {
        v.push_back(fmt::format("chain '{}': no callback on {}:{}", c.name, hop.node, hop.topic));
        prev = nullptr;
        continue;
      }
      if (prev && std::find(prev->publishes.begin(), prev->publishes.end(), hop.topic) ==
        prev->publishes.end())
      {
        v.push_back(fmt::format("chain '{}': '{}' does not publish '{}'", c.name, prev->name,
          hop.topic));
      }
      prev = &*it;
    }
  }
  return v;
}

// ------------------------------------------------------------------ table 1

ScenarioSpec table1_scenario()
{
  using std::chrono::milliseconds;
  ScenarioSpec spec;
  spec.name = "table1";
  NodeSpec node;
  node.name = "subscriber";
  spec.nodes.push_back(node);
  constexpr std::array<std::pair<int, int>, 5> kRows{{{10, 2}, {20, 4}, {50, 5}, {100, 15}, {200, 50}}};
  for (std::size_t i = 0; i < kRows.size(); ++i) {
    const auto topic = fmt::format("topic{}", i + 1);
    spec.topics.push_back(TopicSpec{topic, milliseconds(kRows[i].first), Duration{0}});
    CallbackSpec cb;
    cb.name = fmt::format("callback{}", i + 1);
    cb.node = "subscriber";
    cb.topic = topic;
    cb.demand = milliseconds(kRows[i].second);
    spec.callbacks.push_back(std::move(cb));
  }
  return spec;
}

// ----------------------------------------------------------------- analysis

std::optional<Duration> callback_period(const ScenarioSpec & spec, const CallbackSpec & cb)
{
  return callback_period_depth(spec, cb, 0);
}

std::vector<int> callback_priorities(const ScenarioSpec & spec)
{
  std::vector<int> out(spec.callbacks.size(), 0);
  for (const auto & node : spec.nodes) {
    std::vector<std::size_t> members;
    std::vector<RtTask> keyed;
    for (std::size_t i = 0; i < spec.callbacks.size(); ++i) {
      if (spec.callbacks[i].node == node.name) {
        members.push_back(i);
        const auto period = callback_period(spec, spec.callbacks[i]);
        keyed.push_back(RtTask{spec.callbacks[i].name, Duration{1},
            period.value_or(Duration::max()), 0, std::nullopt});
      }
    }
    const auto assigned = rm_assign(std::move(keyed), node.callback_priority);
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto & cb = spec.callbacks[members[k]];
      out[members[k]] = cb.priority.value_or(assigned[k].priority);
    }
  }
  return out;
}

std::vector<RtTask> rta_tasks(const ScenarioSpec & spec)
{
  std::vector<RtTask> tasks;
  const auto prios = callback_priorities(spec);
  for (std::size_t i = 0; i < spec.callbacks.size(); ++i) {
    const auto & cb = spec.callbacks[i];
    const auto * topic = spec.find_topic(cb.topic);
    if (!topic || !topic->period) {
      continue;
    }
    tasks.push_back(RtTask{cb.name, cb.demand + spec.overheads.rta_inflation, *topic->period,
        prios[i], std::nullopt});
  }
  for (const auto & l : spec.loads) {
    if (l.policy == SchedPolicy::Fifo) {
      tasks.push_back(RtTask{l.name, l.demand, l.period, l.priority, std::nullopt});
    }
  }
  return tasks;
}

RtaResult apply_channel_dimensioning(ScenarioSpec & spec, std::int64_t divergence_factor)
{
  auto result = analyze(rta_tasks(spec), divergence_factor);
  for (auto & cb : spec.callbacks) {
    const auto * entry = result.find(cb.name);
    if (entry && entry->channel_capacity) {
      cb.channel_capacity = std::max<std::size_t>(1, *entry->channel_capacity);
    }
  }
  return result;
}

}  // namespace r2rsim
