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

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "r2rsim/runner.hpp"
#include "r2rsim/scenario.hpp"

namespace
{

constexpr const char * kBuiltinTable1 = "table1";

struct Options
{
  std::string scenario = kBuiltinTable1;
  std::string variant;
  std::string variants = "all";
  std::string duration;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string emit = "stats,report";
  bool nort = false;
  bool dimension_channels = false;
  std::int64_t divergence_factor = r2rsim::kDefaultDivergenceFactor;
  std::size_t jobs = 0;
};

std::vector<std::string> split(const std::string & text)
{
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) {
      parts.push_back(item);
    }
  }
  return parts;
}

r2rsim::VariantId variant_or_throw(const std::string & text, bool nort)
{
  auto v = r2rsim::parse_variant(text);
  if (!v) {
    throw std::invalid_argument("unknown variant '" + text + "'");
  }
  v->nort = v->nort || nort;
  return *v;
}

r2rsim::RunRequest make_request(const Options & o)
{
  r2rsim::RunRequest req;
  req.scenario = o.scenario == kBuiltinTable1 ? r2rsim::table1_scenario() : r2rsim::load_scenario(o.scenario);
  if (!o.variant.empty()) {
    req.variant = variant_or_throw(o.variant, o.nort);
  } else if (o.nort) {
    auto v = req.scenario.variant;
    v.nort = true;
    req.variant = v;
  }
  if (!o.duration.empty()) {
    req.duration = r2rsim::parse_duration(o.duration);
  }
  req.replications = o.reps;
  req.seed = o.seed;
  req.out_dir = o.out;
  req.emit = r2rsim::EmitFlags{false, false, false};
  for (const auto & flag : split(o.emit)) {
    if (flag == "trace") {
      req.emit.trace = true;
    } else if (flag == "stats") {
      req.emit.stats = true;
    } else if (flag == "report") {
      req.emit.report = true;
    } else {
      throw std::invalid_argument("unknown --emit flag '" + flag + "'");
    }
  }
  req.dimension_channels = o.dimension_channels;
  req.divergence_factor = o.divergence_factor;
  req.jobs = o.jobs;
  return req;
}

void add_common(CLI::App & cmd, Options & o)
{
  cmd.add_option("--scenario", o.scenario, "Scenario file, or 'table1' for the built-in benchmark")
    ->capture_default_str();
  cmd.add_option("--duration", o.duration, "Publication window, e.g. 20s or 500ms");
  cmd.add_option("--reps", o.reps, "Replications (seeds seed, seed+1, ...)")->check(CLI::PositiveNumber);
  cmd.add_option("--seed", o.seed, "Base seed");
  cmd.add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd.add_option("--emit", o.emit, "Artifacts to write: trace,stats,report")->capture_default_str();
  cmd.add_flag("--nort", o.nort, "Run subscriber threads under the default policy");
  cmd.add_flag("--dimension-channels", o.dimension_channels,
    "Size every channel from the response-time analysis");
  cmd.add_option("--divergence-factor", o.divergence_factor,
    "Response times beyond this many periods count as unbounded")->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--jobs", o.jobs, "Concurrent replications (0: hardware threads)");
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Discrete-event simulator of ROS 2 callback execution"};
  app.require_subcommand(1);
  Options o;

  auto * run_cmd = app.add_subcommand("run", "Simulate one variant and report statistics");
  add_common(*run_cmd, o);
  run_cmd->add_option("--variant", o.variant, "Variant, e.g. futures-rt or nort-tokio");

  auto * matrix_cmd = app.add_subcommand("matrix", "Simulate several variants into one table");
  add_common(*matrix_cmd, o);
  matrix_cmd->add_option("--variants", o.variants, "Comma-separated variants, or 'all'")
    ->capture_default_str();

  auto * analyze_cmd = app.add_subcommand("analyze", "Response-time analysis only");
  analyze_cmd->add_option("--scenario", o.scenario, "Scenario file, or 'table1'")->capture_default_str();
  analyze_cmd->add_option("--divergence-factor", o.divergence_factor,
    "Response times beyond this many periods count as unbounded")->check(CLI::PositiveNumber)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze_cmd) {
      const auto spec = o.scenario == kBuiltinTable1 ? r2rsim::table1_scenario() :
        r2rsim::load_scenario(o.scenario);
      return r2rsim::analyze(spec, std::cout, o.divergence_factor);
    }
    const auto req = make_request(o);
    if (*run_cmd) {
      return r2rsim::run(req, std::cout);
    }
    std::vector<r2rsim::VariantId> variants;
    if (o.variants == "all") {
      variants = r2rsim::all_variants(o.nort);
    } else {
      for (const auto & name : split(o.variants)) {
        variants.push_back(variant_or_throw(name, o.nort));
      }
    }
    return r2rsim::matrix(req, variants, std::cout);
  } catch (const std::exception & e) {
    std::cerr << "r2rsim: " << e.what() << '\n';
    return 2;
  }
}
