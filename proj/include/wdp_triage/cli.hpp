// Copyright 2026 The wdp-triage Authors
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

// Subcommand implementations behind the `wdp_triage` tool. Everything here
// takes plain option structs so the tool itself only parses flags.
//
// Pipeline config is an INI file with one section per stage:
//
//   [data]     seed, train/test sizes and every mixed-generator knob
//   [label]    time_limit_ms, node_limit for the exact labeller
//   [train]    optimiser settings and the comma-separated seed list
//   [eval]     threshold, sweep grid, permutation repeats, ablation switch
//   [bench]    selector, thresholds, expensive-arm budget, model path
//
// Unknown keys are rejected. The effective config is echoed into the run
// manifest, which is the only output that carries wall-clock time.

#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "wdp_triage/dataset.hpp"
#include "wdp_triage/error.hpp"
#include "wdp_triage/features.hpp"
#include "wdp_triage/generators.hpp"
#include "wdp_triage/hardness.hpp"
#include "wdp_triage/io.hpp"
#include "wdp_triage/router.hpp"
#include "wdp_triage/solvers.hpp"

#ifndef WDP_TRIAGE_VERSION
#define WDP_TRIAGE_VERSION "0.0.0"
#endif

namespace wdp::cli {

namespace fs = std::filesystem;
using io::Json;

inline constexpr std::string_view kVersion = WDP_TRIAGE_VERSION;

// ------------------------------------------------------------- manifest

struct RunManifest {
  std::string subcommand;
  Json config = Json::object();
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;  // relative to the output directory
  std::string status = "ok";
  std::optional<std::string> failed_stage;
  std::optional<std::string> error;
  double wall_time = 0.0;  // seconds
};

inline Json to_json(const RunManifest& m) {
  auto outputs = m.outputs;
  std::sort(outputs.begin(), outputs.end());
  return {{"tool", "wdp_triage"},
          {"version", kVersion},
          {"subcommand", m.subcommand},
          {"config", m.config},
          {"seeds", m.seeds},
          {"inputs", m.inputs},
          {"outputs", outputs},
          {"status", m.status},
          {"failed_stage", m.failed_stage ? Json(*m.failed_stage) : Json(nullptr)},
          {"error", m.error ? Json(*m.error) : Json(nullptr)},
          {"wall_time_s", m.wall_time}};
}

/// Writes files under one output directory and records them in its manifest.
class OutputDir {
 public:
  OutputDir(fs::path root, RunManifest& manifest) : root_(std::move(root)), manifest_(manifest) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_))
      fail(ErrorCode::io_error, "cannot create output directory '" + root_.string() + "'");
  }

  void write(const std::string& relative, std::string_view content) {
    io::write_file(root_ / relative, content);
    manifest_.outputs.push_back(relative);
  }
  void write_json(const std::string& relative, const Json& j) { write(relative, io::dump(j)); }

  void finish(double wall_time) {
    manifest_.wall_time = wall_time;
    io::write_json(root_ / "manifest.json", to_json(manifest_));
  }

  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  RunManifest& manifest_;
};

// --------------------------------------------------------------- config

namespace detail {

struct Binding {
  std::string section, key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

[[noreturn]] inline void bad_value(const std::string& where, const std::string& text,
                                   std::string_view expected) {
  fail(ErrorCode::invalid_config,
       where + " = '" + text + "' is not " + std::string(expected));
}

inline std::uint64_t parse_u64(const std::string& where, const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty())
    bad_value(where, text, "a non-negative integer");
  return v;
}

inline double parse_real(const std::string& where, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
    bad_value(where, text, "a finite number");
  return v;
}

inline bool parse_bool(const std::string& where, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  bad_value(where, text, "a boolean");
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& where,
                                                  const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto b = part.find_first_not_of(" \t"), e = part.find_last_not_of(" \t");
    seeds.push_back(parse_u64(where, b == std::string::npos ? "" : part.substr(b, e - b + 1)));
  }
  if (seeds.empty()) bad_value(where, text, "a comma-separated seed list");
  return seeds;
}

inline std::string seed_list(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) out += (i ? "," : "") + std::to_string(seeds[i]);
  return out;
}

inline std::string ms_text(double seconds) {
  return std::isinf(seconds) ? "0" : io::format_double(seconds * 1e3);
}

inline double ms_value(const std::string& where, const std::string& text, bool zero_is_unlimited) {
  const double ms = parse_real(where, text);
  if (ms == 0.0 && zero_is_unlimited) return std::numeric_limits<double>::infinity();
  if (!(ms > 0.0)) bad_value(where, text, "a positive number of milliseconds");
  return ms / 1e3;
}

inline SelectorMode parse_selector(const std::string& where, const std::string& text) {
  if (text == "cv") return SelectorMode::cv_threshold;
  if (text == "learned") return SelectorMode::learned;
  bad_value(where, text, "'cv' or 'learned'");
}

template <typename T>
Binding integer(std::string s, std::string k, T& ref) {
  const std::string where = s + "." + k;
  return {s, k, [&ref] { return std::to_string(ref); },
          [&ref, where](const std::string& v) { ref = static_cast<T>(parse_u64(where, v)); }};
}

inline Binding real(std::string s, std::string k, double& ref) {
  const std::string where = s + "." + k;
  return {s, k, [&ref] { return io::format_double(ref); },
          [&ref, where](const std::string& v) { ref = parse_real(where, v); }};
}

inline Binding boolean(std::string s, std::string k, bool& ref) {
  const std::string where = s + "." + k;
  return {s, k, [&ref] { return std::string(ref ? "true" : "false"); },
          [&ref, where](const std::string& v) { ref = parse_bool(where, v); }};
}

inline Binding text(std::string s, std::string k, std::string& ref) {
  return {s, k, [&ref] { return ref; }, [&ref](const std::string& v) { ref = v; }};
}

inline Binding milliseconds(std::string s, std::string k, double& seconds, bool zero_unlimited) {
  const std::string where = s + "." + k;
  return {s, k, [&seconds] { return ms_text(seconds); },
          [&seconds, where, zero_unlimited](const std::string& v) {
            seconds = ms_value(where, v, zero_unlimited);
          }};
}

inline void add_mix_bindings(std::vector<Binding>& b, const std::string& s, MixConfig& m) {
  b.push_back(integer(s, "seed", m.seed));
  b.push_back(integer(s, "traps_min", m.traps_min));
  b.push_back(integer(s, "traps_max", m.traps_max));
  b.push_back(integer(s, "k_min", m.k_min));
  b.push_back(integer(s, "k_max", m.k_max));
  b.push_back(integer(s, "items_per_fish", m.items_per_fish));
  b.push_back(real(s, "fish_value_min", m.fish_value_min));
  b.push_back(real(s, "fish_value_max", m.fish_value_max));
  b.push_back(real(s, "whale_position_min", m.whale_position_min));
  b.push_back(real(s, "whale_position_max", m.whale_position_max));
  b.push_back(integer(s, "filler_bids_min", m.filler_bids_min));
  b.push_back(integer(s, "filler_bids_max", m.filler_bids_max));
  b.push_back(real(s, "filler_value_min", m.filler_value_min));
  b.push_back(real(s, "filler_value_max", m.filler_value_max));
  b.push_back(integer(s, "hard_item_pool", m.hard_item_pool));
  b.push_back(integer(s, "easy_bids", m.easy_bids));
  b.push_back(integer(s, "easy_items", m.easy_items));
  b.push_back(integer(s, "easy_max_bundle", m.easy_max_bundle));
  b.push_back(real(s, "value_scale_min", m.value_scale_min));
  b.push_back(real(s, "value_scale_max", m.value_scale_max));
}

inline void apply_ini(std::vector<Binding>& bindings, std::string_view ini_text,
                      std::string_view origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(ini_text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::parse_error, std::string(origin) + ": " + e.message() + " (line " +
                                     std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    if (body.empty())
      fail(ErrorCode::invalid_config,
           std::string(origin) + ": key '" + section + "' must sit inside a [section]");
    for (const auto& [key, value] : body) {
      auto it = std::find_if(bindings.begin(), bindings.end(), [&](const Binding& b) {
        return b.section == section && b.key == key;
      });
      if (it == bindings.end())
        fail(ErrorCode::invalid_config,
             std::string(origin) + ": unknown key '" + section + "." + key + "'");
      it->set(value.get_value<std::string>());
    }
  }
}

inline Json echo(const std::vector<Binding>& bindings) {
  Json out = Json::object();
  for (const auto& b : bindings) out[b.section][b.key] = b.get();
  return out;
}

inline std::string to_ini(const std::vector<Binding>& bindings) {
  std::string out, section;
  for (const auto& b : bindings) {
    if (b.section != section) {
      out += (section.empty() ? "[" : "\n[") + b.section + "]\n";
      section = b.section;
    }
    out += b.key + " = " + b.get() + "\n";
  }
  return out;
}

}  // namespace detail

struct PipelineConfig {
  MixConfig data = [] {
    MixConfig m;
    m.seed = 1;
    m.num_hard = 300;
    m.num_easy = 300;
    return m;
  }();
  std::size_t test_hard = 100, test_easy = 100;
  ExactOptions label;
  TrainConfig train;
  std::vector<std::uint64_t> seeds{42, 123, 456};
  double threshold = 0.05;
  double sweep_min = 0.005, sweep_max = 0.5, sweep_step = 0.005;
  std::size_t importance_repeats = 10;
  bool ablation = true;
  SelectorConfig selector;
  bool calibrate_cv = true;
  std::string model_path;  // learned routing; empty uses the first seed's model
  std::size_t bench_hard = 50, bench_easy = 50;
  std::uint64_t tiny_node_limit = 16;

  /// Every configurable field, bound to this object.
  std::vector<detail::Binding> bindings() {
    using namespace detail;
    std::vector<Binding> b;
    add_mix_bindings(b, "data", data);
    b.push_back(integer("data", "train_hard", data.num_hard));
    b.push_back(integer("data", "train_easy", data.num_easy));
    b.push_back(integer("data", "test_hard", test_hard));
    b.push_back(integer("data", "test_easy", test_easy));
    b.push_back(milliseconds("label", "time_limit_ms", label.time_limit, true));
    b.push_back(integer("label", "node_limit", label.node_limit));
    b.push_back(real("train", "learning_rate", train.learning_rate));
    b.push_back(real("train", "beta1", train.beta1));
    b.push_back(real("train", "beta2", train.beta2));
    b.push_back(real("train", "weight_decay", train.weight_decay));
    b.push_back(integer("train", "batch_size", train.batch_size));
    b.push_back(integer("train", "max_epochs", train.max_epochs));
    b.push_back(integer("train", "patience", train.patience));
    b.push_back(real("train", "validation_fraction", train.validation_fraction));
    b.push_back({"train", "seeds", [this] { return seed_list(seeds); },
                 [this](const std::string& v) { seeds = parse_seed_list("train.seeds", v); }});
    b.push_back(real("eval", "threshold", threshold));
    b.push_back(real("eval", "sweep_min", sweep_min));
    b.push_back(real("eval", "sweep_max", sweep_max));
    b.push_back(real("eval", "sweep_step", sweep_step));
    b.push_back(integer("eval", "importance_repeats", importance_repeats));
    b.push_back(boolean("eval", "ablation", ablation));
    b.push_back({"bench", "selector", [this] { return std::string(to_string(selector.mode)); },
                 [this](const std::string& v) {
                   selector.mode = parse_selector("bench.selector", v);
                 }});
    b.push_back({"bench", "cv_threshold",
                 [this] {
                   return calibrate_cv ? std::string("auto")
                                       : io::format_double(selector.cv_threshold);
                 },
                 [this](const std::string& v) {
                   calibrate_cv = v == "auto";
                   if (!calibrate_cv) selector.cv_threshold = parse_real("bench.cv_threshold", v);
                 }});
    b.push_back(real("bench", "learned_threshold", selector.learned_threshold));
    b.push_back(milliseconds("bench", "time_limit_ms", selector.time_limit, false));
    b.push_back(integer("bench", "node_limit", selector.node_limit));
    b.push_back(integer("bench", "tiny_node_limit", tiny_node_limit));
    b.push_back(text("bench", "model", model_path));
    b.push_back(integer("bench", "bench_hard", bench_hard));
    b.push_back(integer("bench", "bench_easy", bench_easy));
    return b;
  }
};

inline void check(const PipelineConfig& c) {
  MixConfig probe = c.data;
  check(probe);
  check(c.train);
  check(c.selector);
  if (c.data.num_hard + c.data.num_easy < kMinTrainingInstances)
    fail(ErrorCode::invalid_config, "training split needs at least " +
                                        std::to_string(kMinTrainingInstances) + " instances");
  if (c.test_hard + c.test_easy == 0) fail(ErrorCode::invalid_config, "test split is empty");
  if (c.bench_hard == 0 || c.bench_easy == 0)
    fail(ErrorCode::invalid_config, "bench set needs hard and easy instances");
  if (!(c.sweep_step > 0.0) || c.sweep_max < c.sweep_min)
    fail(ErrorCode::invalid_config, "sweep grid needs sweep_min <= sweep_max and a positive step");
  if (c.tiny_node_limit == 0) fail(ErrorCode::invalid_config, "tiny_node_limit must be positive");
}

inline PipelineConfig parse_pipeline_config(std::string_view ini_text,
                                            std::string_view origin = "config") {
  PipelineConfig config;
  auto bindings = config.bindings();
  detail::apply_ini(bindings, ini_text, origin);
  check(config);
  return config;
}

inline PipelineConfig load_pipeline_config(const fs::path& path) {
  return parse_pipeline_config(io::read_file(path), path.string());
}

inline std::string default_pipeline_ini() {
  PipelineConfig config;
  return detail::to_ini(config.bindings());
}

// --------------------------------------------------------------- shared

inline double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

inline std::string csv_row(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) out += (out.empty() ? "" : ",") + c;
  return out + "\n";
}

/// Hybrid comparison on a labelled set: selector against greedy only,
/// exact under a tiny node budget, exact with the full budget and the tag
/// oracle.
struct BenchResult {
  std::vector<HybridReport> reports;  // selector first
  Json summary;
};

inline BenchResult run_bench(std::span<const LabeledInstance> labeled,
                             const SelectorConfig& selector, const HardnessModel* model,
                             std::uint64_t tiny_node_limit, bool calibrated) {
  BenchResult out;
  out.reports.push_back(evaluate_hybrid(labeled, selector, RoutingPolicy::selector, model));
  out.reports.push_back(evaluate_hybrid(labeled, selector, RoutingPolicy::greedy_only, model));
  SelectorConfig tiny = selector;
  tiny.node_limit = tiny_node_limit;
  out.reports.push_back(evaluate_hybrid(labeled, tiny, RoutingPolicy::expensive_only, model));
  out.reports.back().policy = "expensive_only_tiny_budget";
  out.reports.push_back(evaluate_hybrid(labeled, selector, RoutingPolicy::expensive_only, model));
  out.reports.push_back(evaluate_hybrid(labeled, selector, RoutingPolicy::oracle, model));

  Json policies = Json::array();
  for (const auto& r : out.reports) policies.push_back(io::to_json(r));
  out.summary = {{"selector",
                  {{"mode", to_string(selector.mode)},
                   {"cv_threshold", selector.cv_threshold},
                   {"cv_threshold_calibrated", calibrated},
                   {"learned_threshold", selector.learned_threshold},
                   {"tiny_node_limit", tiny_node_limit}}},
                 {"policies", policies}};
  return out;
}

// ------------------------------------------------------------- generate

struct GenerateOptions {
  std::string family = "mixed";  // kstar | trap | mixed | star-mis
  std::size_t count = 1;
  std::optional<std::uint64_t> seed;
  fs::path out;
  std::optional<fs::path> config;  // INI with a [data] section (mixed family)
  std::size_t k = 3;
  double epsilon = 0.0;
  double whale = 100.0;
  double fish = 40.0;
  std::size_t m_trap = 0;
  double time_limit = std::numeric_limits<double>::infinity();  // exact labelling
};

/// kstar / trap / star-mis emit `count` instances with k, k+1, ...; mixed
/// emits ceil(count/2) hard and floor(count/2) easy instances.
inline RunManifest cmd_generate(const GenerateOptions& opt) {
  const double start = now_seconds();
  RunManifest manifest;
  manifest.subcommand = "generate";
  OutputDir out(opt.out, manifest);

  MixConfig mix;
  std::vector<detail::Binding> bindings;
  detail::add_mix_bindings(bindings, "data", mix);
  if (opt.config) {
    manifest.inputs.push_back(opt.config->string());
    detail::apply_ini(bindings, io::read_file(*opt.config), opt.config->string());
  }
  if (opt.seed) mix.seed = *opt.seed;
  mix.num_hard = (opt.count + 1) / 2;
  mix.num_easy = opt.count / 2;

  Json flags = {{"family", opt.family}, {"count", opt.count}, {"seed", mix.seed}};
  std::vector<TaggedInstance> tagged;
  std::vector<MwisInstance> graphs;
  if (opt.family == "kstar" || opt.family == "trap") {
    flags["k"] = opt.k;
    flags["m_trap"] = opt.m_trap;
    if (opt.family == "kstar") flags["epsilon"] = opt.epsilon;
    else flags.update({{"whale_value", opt.whale}, {"fish_value", opt.fish}});
    for (std::size_t i = 0; i < opt.count; ++i) {
      TrapConfig t{opt.k + i, opt.whale, opt.fish, opt.epsilon, opt.m_trap, mix.seed};
      GeneratedTrap g = opt.family == "kstar" ? gen_kstar(t) : gen_trap(t);
      tagged.push_back({std::move(g.instance), InstanceTag::hard, g.certificate});
    }
  } else if (opt.family == "star-mis") {
    flags.update({{"k", opt.k}, {"center_weight", opt.whale}, {"leaf_weight", opt.fish}});
    for (std::size_t i = 0; i < opt.count; ++i) {
      graphs.push_back(gen_star_trap_mis(opt.k + i, opt.whale, opt.fish, mix.seed));
      WdpInstance w = mwis_to_wdp(graphs.back());
      w.name = "star_mis_k" + std::to_string(opt.k + i);
      w.seed = mix.seed;
      tagged.push_back({std::move(w), InstanceTag::hard, std::nullopt});
    }
  } else if (opt.family == "mixed") {
    check(mix);
    flags["data"] = detail::echo(bindings)["data"];
    tagged = gen_mixed(mix);
  } else {
    fail(ErrorCode::invalid_argument,
         "unknown family '" + opt.family + "' (expected kstar, trap, mixed or star-mis)");
  }
  flags["time_limit_ms"] = detail::ms_text(opt.time_limit);
  manifest.config = flags;
  manifest.seeds = {mix.seed};

  const auto labeled = label_with_exact(std::move(tagged), ExactOptions{opt.time_limit, 0});
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    const auto& l = labeled[i];
    out.write_json(l.instance.name + ".json", io::to_json(l.instance));
    out.write_json(l.instance.name + ".label.json", io::label_json(l));
    if (!graphs.empty()) out.write_json(l.instance.name + ".mwis.json", io::to_json(graphs[i]));
  }
  out.finish(now_seconds() - start);
  return manifest;
}

// ---------------------------------------------------------------- solve

struct SolveOptions {
  fs::path instance;
  std::string solver = "exact";  // greedy | exact | brute
  bool mwis = false;             // input is an MWIS graph
  double time_limit = std::numeric_limits<double>::infinity();
};

inline Json cmd_solve(const SolveOptions& opt) {
  const WdpInstance instance = opt.mwis ? mwis_to_wdp(io::mwis_from_json(io::read_json(opt.instance)))
                                        : io::read_instance(opt.instance);
  SolveResult r;
  if (opt.solver == "greedy") r = greedy(instance);
  else if (opt.solver == "exact") r = exact(instance, opt.time_limit);
  else if (opt.solver == "brute") r = brute_force(instance);
  else fail(ErrorCode::invalid_argument, "unknown solver '" + opt.solver + "'");
  return io::to_json(instance, r);
}

// ------------------------------------------------------------- features

/// Instance files (or directories of them) to a features CSV. The label
/// column is written when every instance has a label sidecar.
inline std::string cmd_features(const std::vector<fs::path>& inputs) {
  std::vector<fs::path> files;
  for (const auto& p : inputs) {
    if (fs::is_directory(p)) {
      auto more = io::instance_files(p);
      files.insert(files.end(), more.begin(), more.end());
    } else {
      files.push_back(p);
    }
  }
  if (files.empty()) fail(ErrorCode::invalid_argument, "no instance files given");
  const bool labelled = std::all_of(files.begin(), files.end(),
                                    [](const fs::path& f) { return fs::exists(io::label_path(f)); });
  std::vector<FeatureVector> rows(files.size());
  std::vector<double> gaps;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const WdpInstance instance = io::read_instance(files[i]);
    rows[i] = extract(instance);
    if (labelled)
      gaps.push_back(io::labeled_from_json(instance, io::read_json(io::label_path(files[i]))).greedy_gap);
  }
  return io::features_csv(rows, gaps);
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  fs::path features;
  fs::path out;
  std::optional<fs::path> config;  // INI with a [train] section
  std::optional<std::uint64_t> seed;
};

inline HardnessModel cmd_train(const TrainOptions& opt) {
  PipelineConfig pc;
  if (opt.config) pc = load_pipeline_config(*opt.config);
  TrainConfig tc = pc.train;
  tc.seed = opt.seed.value_or(pc.seeds.front());
  const FeatureDataset data = io::read_features_csv(io::read_file(opt.features));
  HardnessModel model = train(data, tc);
  io::save_model(opt.out, model);
  return model;
}

// ----------------------------------------------------------------- eval

struct EvalOptions {
  fs::path model;
  fs::path features;
  fs::path out;
  double threshold = 0.05;
  double sweep_min = 0.005, sweep_max = 0.5, sweep_step = 0.005;
};

inline EvalReport cmd_eval(const EvalOptions& opt) {
  const double start = now_seconds();
  RunManifest manifest;
  manifest.subcommand = "eval";
  manifest.inputs = {opt.model.string(), opt.features.string()};
  manifest.config = {{"threshold", opt.threshold},
                     {"sweep_min", opt.sweep_min},
                     {"sweep_max", opt.sweep_max},
                     {"sweep_step", opt.sweep_step}};
  const HardnessModel model = io::load_model(opt.model);
  const FeatureDataset test = io::read_features_csv(io::read_file(opt.features));
  const EvalReport report = evaluate(model, test, opt.threshold);
  const auto grid = threshold_grid(opt.sweep_min, opt.sweep_max, opt.sweep_step);
  const auto curve = threshold_sweep(model, test, grid);

  OutputDir out(opt.out, manifest);
  out.write_json("eval_report.json", io::to_json(report));
  out.write("sweep.csv", io::sweep_csv(curve));
  out.finish(now_seconds() - start);
  return report;
}

// ---------------------------------------------------------- route/bench

struct RouteOptions {
  SelectorConfig selector;
  std::optional<double> threshold;  // overrides the active mode's threshold
  std::optional<fs::path> model;
};

inline SelectorConfig effective_selector(const RouteOptions& opt) {
  SelectorConfig s = opt.selector;
  if (opt.threshold)
    (s.mode == SelectorMode::cv_threshold ? s.cv_threshold : s.learned_threshold) = *opt.threshold;
  check(s);
  return s;
}

inline std::optional<HardnessModel> load_optional_model(const RouteOptions& opt) {
  if (opt.model) return io::load_model(*opt.model);
  if (opt.selector.mode == SelectorMode::learned)
    fail(ErrorCode::not_trained, "learned selector needs --model");
  return std::nullopt;
}

inline Json cmd_route(const fs::path& instance_path, const RouteOptions& opt) {
  const SelectorConfig s = effective_selector(opt);
  const auto model = load_optional_model(opt);
  const WdpInstance instance = io::read_instance(instance_path);
  const HybridSolve solved = hybrid_solve(instance, s, model ? &*model : nullptr);
  Json j = {{"name", instance.name},
            {"selector", to_string(s.mode)},
            {"decision", to_string(solved.route)},
            {"cv", bid_density_cv(instance)},
            {"predicted_gap", model ? Json(predict(*model, extract(instance))) : Json(nullptr)},
            {"result", io::to_json(instance, solved.result)}};
  return j;
}

struct BenchOptions {
  fs::path dataset;  // directory of instances with label sidecars
  fs::path out;
  RouteOptions route;
  std::uint64_t tiny_node_limit = 16;
};

inline BenchResult cmd_bench(const BenchOptions& opt) {
  const double start = now_seconds();
  RunManifest manifest;
  manifest.subcommand = "bench";
  manifest.inputs.push_back(opt.dataset.string());
  if (opt.route.model) manifest.inputs.push_back(opt.route.model->string());
  const SelectorConfig s = effective_selector(opt.route);
  const auto model = load_optional_model(opt.route);
  const auto labeled = io::read_labeled_dir(opt.dataset);
  if (labeled.empty()) fail(ErrorCode::invalid_argument, "no labelled instances found");
  BenchResult result = run_bench(labeled, s, model ? &*model : nullptr, opt.tiny_node_limit, false);
  manifest.config = result.summary["selector"];
  manifest.config["time_limit_ms"] = detail::ms_text(s.time_limit);

  OutputDir out(opt.out, manifest);
  out.write_json("hybrid_report.json", result.summary);
  out.write("routing_decisions.csv", io::decisions_csv(result.reports.front().decisions));
  out.finish(now_seconds() - start);
  return result;
}

// ------------------------------------------------------------- pipeline

struct PipelineOptions {
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::uint64_t> seed;  // overrides data.seed
};

struct PipelineResult {
  RunManifest manifest;
  std::vector<EvalReport> reports;  // one per training seed
  std::vector<SweepPoint> best;     // best sweep point per seed
  double cv_threshold = 0.0;
  std::vector<HybridReport> bench;
};

namespace detail {

template <typename Fn>
void run_stage(std::string_view name, RunManifest& manifest, OutputDir& out, double start, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    const Error* err = dynamic_cast<const Error*>(&e);
    const std::string line = err ? err->line() : std::string("E_INTERNAL: ") + e.what();
    manifest.status = "failed";
    manifest.failed_stage = std::string(name);
    manifest.error = line;
    out.finish(now_seconds() - start);
    fail(ErrorCode::stage_failed, "stage '" + std::string(name) + "' failed: " + line);
  }
}

}  // namespace detail

/// generate -> label -> features -> train (per seed) -> evaluate, sweep,
/// permutation importance, leave-one-group-out -> hybrid bench. Every output
/// except manifest.json is a pure function of the config.
inline PipelineResult cmd_pipeline(const PipelineOptions& opt) {
  const double start = now_seconds();
  PipelineResult res;
  RunManifest& manifest = res.manifest;
  manifest.subcommand = "pipeline";

  PipelineConfig config;
  if (opt.config) {
    manifest.inputs.push_back(opt.config->string());
    config = load_pipeline_config(*opt.config);
  }
  if (opt.seed) config.data.seed = *opt.seed;
  check(config);
  manifest.config = detail::echo(config.bindings());
  manifest.seeds = config.seeds;

  OutputDir out(opt.out, manifest);
  out.write("config.ini", detail::to_ini(config.bindings()));

  std::vector<TaggedInstance> train_raw, test_raw, bench_raw;
  detail::run_stage("generate", manifest, out, start, [&] {
    MixConfig m = config.data;
    train_raw = gen_mixed(m);
    m.seed = wdp::detail::derive_seed(config.data.seed, 0x7e57);
    m.num_hard = config.test_hard;
    m.num_easy = config.test_easy;
    test_raw = gen_mixed(m);
    m.seed = wdp::detail::derive_seed(config.data.seed, 0xbe4c);
    m.num_hard = config.bench_hard;
    m.num_easy = config.bench_easy;
    bench_raw = gen_mixed(m);
  });

  std::vector<LabeledInstance> train_l, test_l, bench_l;
  detail::run_stage("label", manifest, out, start, [&] {
    train_l = label_with_exact(std::move(train_raw), config.label);
    test_l = label_with_exact(std::move(test_raw), config.label);
    bench_l = label_with_exact(std::move(bench_raw), config.label);
    std::string csv = "split,name,tag,greedy_gap,optimal_welfare,greedy_welfare,cv\n";
    auto emit = [&](std::string_view split, const std::vector<LabeledInstance>& set) {
      for (const auto& l : set)
        csv += csv_row({std::string(split), l.instance.name, std::string(to_string(l.tag)),
                        io::format_double(l.greedy_gap), io::format_double(l.optimal_welfare),
                        io::format_double(l.greedy_welfare),
                        io::format_double(bid_density_cv(l.instance))});
    };
    emit("train", train_l);
    emit("test", test_l);
    emit("bench", bench_l);
    out.write("labels.csv", csv);
  });

  FeatureDataset train_set, test_set;
  detail::run_stage("features", manifest, out, start, [&] {
    train_set = to_feature_dataset(train_l);
    test_set = to_feature_dataset(test_l);
    out.write("features_train.csv", io::features_csv(train_set.features, train_set.gaps));
    out.write("features_test.csv", io::features_csv(test_set.features, test_set.gaps));
  });

  std::vector<HardnessModel> models;
  detail::run_stage("train", manifest, out, start, [&] {
    for (auto seed : config.seeds) {
      TrainConfig tc = config.train;
      tc.seed = seed;
      models.push_back(train(train_set, tc));
      out.write_json("models/model_seed" + std::to_string(seed) + ".json", io::to_json(models.back()));
    }
  });

  detail::run_stage("evaluate", manifest, out, start, [&] {
    const auto grid = threshold_grid(config.sweep_min, config.sweep_max, config.sweep_step);
    std::string table = "Seed,MAE,Correlation,Accuracy,Precision,Recall\n";
    std::string best = "Seed,BestThreshold,BestAccuracy,PlateauPoints\n";
    double sums[5] = {};
    for (std::size_t s = 0; s < models.size(); ++s) {
      const auto seed = std::to_string(config.seeds[s]);
      const EvalReport r = evaluate(models[s], test_set, config.threshold);
      const auto curve = threshold_sweep(models[s], test_set, grid);
      const SweepPoint top = best_threshold(curve);
      res.reports.push_back(r);
      res.best.push_back(top);
      out.write_json("eval/eval_seed" + seed + ".json", io::to_json(r));
      out.write("eval/sweep_seed" + seed + ".csv", io::sweep_csv(curve));
      table += csv_row({seed, io::format_double(r.mae), io::format_double(r.pearson_r),
                        io::format_double(r.accuracy), io::format_double(r.precision),
                        io::format_double(r.recall)});
      best += csv_row({seed, io::format_double(top.threshold), io::format_double(top.accuracy),
                       std::to_string(max_accuracy_plateau(curve))});
      const double v[5] = {r.mae, r.pearson_r, r.accuracy, r.precision, r.recall};
      for (int i = 0; i < 5; ++i) sums[i] += v[i];
    }
    const double n = static_cast<double>(models.size());
    table += csv_row({"Mean", io::format_double(sums[0] / n), io::format_double(sums[1] / n),
                      io::format_double(sums[2] / n), io::format_double(sums[3] / n),
                      io::format_double(sums[4] / n)});
    out.write("classifier_report.csv", table);
    out.write("threshold_summary.csv", best);
  });

  detail::run_stage("importance", manifest, out, start, [&] {
    std::string header = "feature";
    for (auto seed : config.seeds) header += ",seed_" + std::to_string(seed);
    std::string csv = header + ",mean\n";
    std::vector<std::array<double, kNumFeatures>> imp;
    for (std::size_t s = 0; s < models.size(); ++s)
      imp.push_back(permutation_importance(models[s], test_set, config.importance_repeats,
                                           config.seeds[s]));
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      std::string row(kFeatureNames[j]);
      double sum = 0.0;
      for (const auto& v : imp) {
        row += "," + io::format_double(v[j]);
        sum += v[j];
      }
      csv += row + "," + io::format_double(sum / static_cast<double>(imp.size())) + "\n";
    }
    out.write("permutation_importance.csv", csv);
  });

  if (config.ablation) {
    detail::run_stage("ablation", manifest, out, start, [&] {
      const auto groups = feature_groups();
      const LogoTable t = logo_ablation(train_set, test_set, groups, config.train, config.seeds);
      std::string csv = "group,size,mae_without,delta_mae,delta_corr\n";
      csv += csv_row({"none", "0", io::format_double(t.baseline_mae), "0", "0"});
      for (const auto& r : t.rows)
        csv += csv_row({r.group, std::to_string(r.size), io::format_double(r.mae_without),
                        io::format_double(r.delta_mae), io::format_double(r.delta_corr)});
      out.write("logo_ablation.csv", csv);
    });
  }

  detail::run_stage("bench", manifest, out, start, [&] {
    SelectorConfig s = config.selector;
    if (config.calibrate_cv) s.cv_threshold = calibrate_cv_threshold(train_l);
    res.cv_threshold = s.cv_threshold;
    std::optional<HardnessModel> loaded;
    const HardnessModel* model = models.empty() ? nullptr : &models.front();
    if (!config.model_path.empty()) {
      loaded = io::load_model(config.model_path);
      model = &*loaded;
    }
    const CvHistogram h = cv_histogram(train_l);
    std::string cv_csv = "tag,cv\n";
    for (double v : h.hard) cv_csv += "hard," + io::format_double(v) + "\n";
    for (double v : h.easy) cv_csv += "easy," + io::format_double(v) + "\n";
    out.write("cv_histogram.csv", cv_csv);

    BenchResult b = run_bench(bench_l, s, model, config.tiny_node_limit, config.calibrate_cv);
    out.write_json("hybrid_report.json", b.summary);
    out.write("routing_decisions.csv", io::decisions_csv(b.reports.front().decisions));
    res.bench = std::move(b.reports);
  });

  out.finish(now_seconds() - start);
  return res;
}

}  // namespace wdp::cli
