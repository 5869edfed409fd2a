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

#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wdp_triage/cli.hpp"

namespace {

namespace fs = std::filesystem;
using wdp::cli::Json;

double seconds_from_ms(double ms) {
  if (ms < 0.0) wdp::fail(wdp::ErrorCode::invalid_argument, "--time-limit-ms must be >= 0");
  return ms == 0.0 ? std::numeric_limits<double>::infinity() : ms / 1e3;
}

void emit(const std::optional<std::string>& out, const std::string& text) {
  if (out) wdp::io::write_file(*out, text);
  else std::cout << text;
}

wdp::SelectorMode selector_mode(const std::string& s) {
  return s == "learned" ? wdp::SelectorMode::learned : wdp::SelectorMode::cv_threshold;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Winner-determination triage: trap generators, solvers, hardness model, routing"};
  app.set_version_flag("--version", std::string(wdp::cli::kVersion));
  app.require_subcommand(1);

  // generate
  wdp::cli::GenerateOptions gen;
  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_config;
  double gen_ms = 0.0;
  auto* g = app.add_subcommand("generate", "Write instances, label sidecars and a manifest");
  g->add_option("--family", gen.family, "kstar | trap | mixed | star-mis")
      ->check(CLI::IsMember({"kstar", "trap", "mixed", "star-mis"}));
  g->add_option("--count", gen.count, "Number of instances");
  g->add_option("--seed", gen_seed, "Generator seed");
  g->add_option("--out", gen_out, "Output directory")->required();
  g->add_option("--config", gen_config, "INI file with a [data] section (mixed)");
  g->add_option("--k", gen.k, "Fish count (first instance)");
  g->add_option("--epsilon", gen.epsilon, "k-star tie margin");
  g->add_option("--whale-value", gen.whale, "Whale value (trap) or centre weight (star-mis)");
  g->add_option("--fish-value", gen.fish, "Fish value (trap) or leaf weight (star-mis)");
  g->add_option("--m-trap", gen.m_trap, "Items per trap, 0 = k");
  g->add_option("--time-limit-ms", gen_ms, "Exact labelling budget, 0 = none");

  // solve
  wdp::cli::SolveOptions solve;
  std::string solve_in;
  std::optional<std::string> solve_out;
  double solve_ms = 0.0;
  auto* s = app.add_subcommand("solve", "Solve one instance and print the result JSON");
  s->add_option("instance", solve_in, "Instance JSON")->required();
  s->add_option("--solver", solve.solver, "greedy | exact | brute")
      ->check(CLI::IsMember({"greedy", "exact", "brute"}));
  s->add_flag("--mwis", solve.mwis, "Input is an MWIS graph");
  s->add_option("--time-limit-ms", solve_ms, "Exact budget, 0 = none");
  s->add_option("--out", solve_out, "Write to file instead of stdout");

  // features
  std::vector<std::string> feat_in;
  std::optional<std::string> feat_out;
  auto* f = app.add_subcommand("features", "Feature CSV for instance files or directories");
  f->add_option("inputs", feat_in, "Instance files or directories")->required();
  f->add_option("--out", feat_out, "Write to file instead of stdout");

  // train
  wdp::cli::TrainOptions tr;
  std::string tr_features, tr_out, tr_config;
  std::uint64_t tr_seed = 42;
  auto* t = app.add_subcommand("train", "Train the hardness regressor on a labelled CSV");
  t->add_option("--features", tr_features, "Labelled features CSV")->required();
  t->add_option("--out", tr_out, "Model JSON")->required();
  t->add_option("--config", tr_config, "INI file with a [train] section");
  auto* tr_seed_opt = t->add_option("--seed", tr_seed, "Training seed");

  // eval
  wdp::cli::EvalOptions ev;
  std::string ev_model, ev_features, ev_out;
  auto* e = app.add_subcommand("eval", "Evaluate a model; writes report JSON and sweep CSV");
  e->add_option("--model", ev_model, "Model JSON")->required();
  e->add_option("--features", ev_features, "Labelled features CSV")->required();
  e->add_option("--out", ev_out, "Output directory")->required();
  e->add_option("--threshold", ev.threshold, "Gap threshold for binary metrics");
  e->add_option("--sweep-min", ev.sweep_min);
  e->add_option("--sweep-max", ev.sweep_max);
  e->add_option("--sweep-step", ev.sweep_step);

  // route and bench share selector flags
  std::string selector = "cv", model_path;
  std::optional<double> threshold;
  double route_ms = 10000.0;
  auto add_selector = [&](CLI::App* sub) {
    sub->add_option("--selector", selector, "cv | learned")
        ->check(CLI::IsMember({"cv", "learned"}));
    sub->add_option("--threshold", threshold, "CV threshold or predicted-gap threshold");
    sub->add_option("--model", model_path, "Model JSON (learned selector)");
    sub->add_option("--time-limit-ms", route_ms, "Expensive-arm budget");
  };
  std::string route_in;
  std::optional<std::string> route_out;
  auto* r = app.add_subcommand("route", "Route one instance and solve it on the chosen arm");
  r->add_option("instance", route_in, "Instance JSON")->required();
  r->add_option("--out", route_out, "Write to file instead of stdout");
  add_selector(r);

  std::string bench_in, bench_out;
  std::uint64_t tiny = 16;
  auto* b = app.add_subcommand("bench", "Hybrid routing benchmark over a labelled directory");
  b->add_option("--dataset", bench_in, "Directory written by generate")->required();
  b->add_option("--out", bench_out, "Output directory")->required();
  b->add_option("--tiny-node-limit", tiny, "Node budget of the tiny-budget exact baseline");
  add_selector(b);

  // pipeline
  std::string pipe_config, pipe_out;
  std::uint64_t pipe_seed = 0;
  bool print_config = false;
  auto* p = app.add_subcommand("pipeline", "End-to-end run into one results bundle");
  p->add_option("--config", pipe_config, "Pipeline INI file");
  p->add_option("--out", pipe_out, "Output directory");
  auto* pipe_seed_opt = p->add_option("--seed", pipe_seed, "Overrides data.seed");
  p->add_flag("--print-default-config", print_config, "Print the default INI and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForVersion& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::string msg = err.what();
    for (auto& c : msg)
      if (c == '\n') c = ' ';
    std::fprintf(stderr, "error: %s: %s\n",
                 std::string(wdp::to_string(wdp::ErrorCode::invalid_argument)).c_str(),
                 msg.c_str());
    return 2;
  }

  auto route_options = [&] {
    wdp::cli::RouteOptions ro;
    ro.selector.mode = selector_mode(selector);
    ro.selector.time_limit = seconds_from_ms(route_ms);
    ro.threshold = threshold;
    if (!model_path.empty()) ro.model = model_path;
    return ro;
  };

  try {
    if (*g) {
      gen.out = gen_out;
      if (g->count("--seed")) gen.seed = gen_seed;
      if (!gen_config.empty()) gen.config = gen_config;
      gen.time_limit = seconds_from_ms(gen_ms);
      const auto m = wdp::cli::cmd_generate(gen);
      std::printf("wrote %zu files to %s\n", m.outputs.size() + 1, gen_out.c_str());
    } else if (*s) {
      solve.instance = solve_in;
      solve.time_limit = seconds_from_ms(solve_ms);
      emit(solve_out, wdp::io::dump(wdp::cli::cmd_solve(solve)));
    } else if (*f) {
      std::vector<fs::path> inputs(feat_in.begin(), feat_in.end());
      emit(feat_out, wdp::cli::cmd_features(inputs));
    } else if (*t) {
      tr.features = tr_features;
      tr.out = tr_out;
      if (!tr_config.empty()) tr.config = tr_config;
      if (tr_seed_opt->count()) tr.seed = tr_seed;
      const auto model = wdp::cli::cmd_train(tr);
      std::printf("best epoch %zu, validation mse %s\n", model.best_epoch,
                  wdp::io::format_double(model.best_validation_mse).c_str());
    } else if (*e) {
      ev.model = ev_model;
      ev.features = ev_features;
      ev.out = ev_out;
      const auto rep = wdp::cli::cmd_eval(ev);
      std::printf("mae %s r %s accuracy %s\n", wdp::io::format_double(rep.mae).c_str(),
                  wdp::io::format_double(rep.pearson_r).c_str(),
                  wdp::io::format_double(rep.accuracy).c_str());
    } else if (*r) {
      emit(route_out, wdp::io::dump(wdp::cli::cmd_route(route_in, route_options())));
    } else if (*b) {
      wdp::cli::BenchOptions bo;
      bo.dataset = bench_in;
      bo.out = bench_out;
      bo.route = route_options();
      bo.tiny_node_limit = tiny;
      const auto res = wdp::cli::cmd_bench(bo);
      for (const auto& rep : res.reports)
        std::printf("%-28s overall %s hard %s easy %s\n", rep.policy.c_str(),
                    wdp::io::format_double(rep.overall_gap).c_str(),
                    wdp::io::format_double(rep.hard_gap).c_str(),
                    wdp::io::format_double(rep.easy_gap).c_str());
    } else if (*p) {
      if (print_config) {
        std::cout << wdp::cli::default_pipeline_ini();
        return 0;
      }
      if (pipe_out.empty())
        wdp::fail(wdp::ErrorCode::invalid_argument, "pipeline needs --out");
      wdp::cli::PipelineOptions po;
      if (!pipe_config.empty()) po.config = pipe_config;
      po.out = pipe_out;
      if (pipe_seed_opt->count()) po.seed = pipe_seed;
      const auto res = wdp::cli::cmd_pipeline(po);
      std::printf("pipeline finished: %zu files in %s\n", res.manifest.outputs.size() + 1,
                  pipe_out.c_str());
    }
  } catch (const wdp::Error& err) {
    std::fprintf(stderr, "error: %s\n", err.line().c_str());
    return 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: E_INTERNAL: %s\n", err.what());
    return 1;
  }
  return 0;
}
