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

// JSON and CSV serialisation for instances, labels, solver results, models
// and reports. Doubles are written in shortest round-trip form, so files read
// back exactly and identical runs produce identical bytes.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wdp_triage/core_model.hpp"
#include "wdp_triage/dataset.hpp"
#include "wdp_triage/error.hpp"
#include "wdp_triage/features.hpp"
#include "wdp_triage/generators.hpp"
#include "wdp_triage/hardness.hpp"
#include "wdp_triage/router.hpp"
#include "wdp_triage/solvers.hpp"

namespace wdp::io {

using Json = nlohmann::ordered_json;

inline constexpr int kModelSchemaVersion = 1;

// ---------------------------------------------------------------- files

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_error, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::io_error, "write to '" + path.string() + "' failed");
}

inline Json parse_json(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::parse_error, std::string(what) + ": " + e.what());
  }
}

inline Json read_json(const std::filesystem::path& path) {
  return parse_json(read_file(path), path.string());
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline void write_json(const std::filesystem::path& path, const Json& j) {
  write_file(path, dump(j));
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

template <typename T>
T field(const Json& j, const char* key, std::string_view context) {
  if (!j.is_object() || !j.contains(key))
    fail(ErrorCode::parse_error, std::string(context) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::parse_error,
         std::string(context) + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

inline std::vector<double> flatten(const Json& rows, std::size_t r, std::size_t c,
                                   std::string_view context) {
  if (!rows.is_array() || rows.size() != r)
    fail(ErrorCode::parse_error, std::string(context) + ": expected " + std::to_string(r) + " rows");
  std::vector<double> out;
  out.reserve(r * c);
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != c)
      fail(ErrorCode::parse_error,
           std::string(context) + ": expected rows of " + std::to_string(c) + " values");
    for (const auto& v : row) {
      if (!v.is_number()) fail(ErrorCode::parse_error, std::string(context) + ": non-numeric entry");
      out.push_back(v.get<double>());
    }
  }
  return out;
}

inline Json nest(std::span<const double> flat, std::size_t r, std::size_t c) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < r; ++i)
    rows.push_back(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(i * c),
                                       flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * c)));
  return rows;
}

inline std::vector<double> vector_of(const Json& j, const char* key, std::size_t n,
                                     std::string_view context) {
  auto v = field<std::vector<double>>(j, key, context);
  if (v.size() != n)
    fail(ErrorCode::parse_error, std::string(context) + ": field '" + key + "' needs " +
                                     std::to_string(n) + " values");
  return v;
}

}  // namespace detail

// ------------------------------------------------------------ instances

inline Json to_json(const WdpInstance& instance) {
  Json items = Json::array();
  for (const auto& item : instance.items) items.push_back({{"id", item.id}, {"capacity", item.capacity}});
  Json bids = Json::array();
  for (const auto& bid : instance.bids)
    bids.push_back(
        {{"id", bid.id}, {"value", bid.value}, {"items", bid.items}, {"demand", bid.demand}});
  return {{"name", instance.name}, {"seed", instance.seed}, {"items", items}, {"bids", bids}};
}

inline WdpInstance instance_from_json(const Json& j) {
  constexpr std::string_view ctx = "instance";
  WdpInstance instance;
  instance.name = detail::field<std::string>(j, "name", ctx);
  instance.seed = detail::field<std::uint64_t>(j, "seed", ctx);
  const auto items = detail::field<Json>(j, "items", ctx);
  const auto bids = detail::field<Json>(j, "bids", ctx);
  if (!items.is_array() || !bids.is_array())
    fail(ErrorCode::parse_error, "instance: 'items' and 'bids' must be arrays");
  for (const auto& item : items)
    instance.items.push_back({detail::field<ItemId>(item, "id", "item"),
                              detail::field<double>(item, "capacity", "item")});
  for (const auto& bid : bids)
    instance.bids.push_back({detail::field<BidId>(bid, "id", "bid"),
                             detail::field<double>(bid, "value", "bid"),
                             detail::field<std::vector<ItemId>>(bid, "items", "bid"),
                             detail::field<double>(bid, "demand", "bid")});
  require_valid(instance);
  return instance;
}

inline WdpInstance read_instance(const std::filesystem::path& path) {
  return instance_from_json(read_json(path));
}

inline Json to_json(const MwisInstance& mwis) {
  Json edges = Json::array();
  for (auto [u, v] : mwis.edges) edges.push_back({u, v});
  return {{"weights", mwis.weights}, {"edges", edges}};
}

inline MwisInstance mwis_from_json(const Json& j) {
  MwisInstance mwis;
  mwis.weights = detail::field<std::vector<double>>(j, "weights", "mwis");
  mwis.edges = detail::field<std::vector<std::pair<std::size_t, std::size_t>>>(j, "edges", "mwis");
  if (auto problems = validate(mwis); !problems.empty())
    fail(ErrorCode::invalid_instance, problems.front());
  return mwis;
}

// --------------------------------------------------------------- labels

inline Json to_json(const Certificate& c) {
  return {{"greedy_welfare", c.greedy_welfare},
          {"optimal_welfare", c.optimal_welfare},
          {"analytic_ratio", c.analytic_ratio}};
}

inline Json label_json(const LabeledInstance& labeled) {
  return {{"greedy_gap", labeled.greedy_gap},
          {"tag", to_string(labeled.tag)},
          {"certificate", labeled.certificate ? to_json(*labeled.certificate) : Json(nullptr)},
          {"optimal_welfare", labeled.optimal_welfare},
          {"greedy_welfare", labeled.greedy_welfare}};
}

inline LabeledInstance labeled_from_json(WdpInstance instance, const Json& label) {
  constexpr std::string_view ctx = "label";
  LabeledInstance out;
  out.instance = std::move(instance);
  out.greedy_gap = detail::field<double>(label, "greedy_gap", ctx);
  out.tag = parse_tag(detail::field<std::string>(label, "tag", ctx));
  out.optimal_welfare = detail::field<double>(label, "optimal_welfare", ctx);
  out.greedy_welfare = detail::field<double>(label, "greedy_welfare", ctx);
  if (const auto c = detail::field<Json>(label, "certificate", ctx); !c.is_null())
    out.certificate = Certificate{detail::field<double>(c, "greedy_welfare", "certificate"),
                                  detail::field<double>(c, "optimal_welfare", "certificate"),
                                  detail::field<double>(c, "analytic_ratio", "certificate")};
  if (!(out.greedy_gap >= 0.0 && out.greedy_gap <= 1.0))
    fail(ErrorCode::parse_error, "label: greedy_gap must lie in [0, 1]");
  return out;
}

/// Instance files are `<name>.json` with the label in `<name>.label.json`.
inline std::filesystem::path label_path(const std::filesystem::path& instance_path) {
  auto p = instance_path;
  p.replace_extension(".label.json");
  return p;
}

inline void write_labeled(const std::filesystem::path& dir, const LabeledInstance& labeled) {
  const auto path = dir / (labeled.instance.name + ".json");
  write_json(path, to_json(labeled.instance));
  write_json(label_path(path), label_json(labeled));
}

/// Instance JSON files of a directory in name order, label sidecars skipped.
inline std::vector<std::filesystem::path> instance_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    fail(ErrorCode::io_error, "'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    if (name.ends_with(".label.json") || name.ends_with(".mwis.json") || name == "manifest.json")
      continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline std::vector<LabeledInstance> read_labeled_dir(const std::filesystem::path& dir) {
  std::vector<LabeledInstance> out;
  for (const auto& path : instance_files(dir)) {
    const auto lp = label_path(path);
    if (!std::filesystem::exists(lp))
      fail(ErrorCode::io_error, "missing label file '" + lp.string() + "'");
    out.push_back(labeled_from_json(read_instance(path), read_json(lp)));
  }
  return out;
}

// -------------------------------------------------------------- results

inline Json to_json(const WdpInstance& instance, const SolveResult& result) {
  std::vector<BidId> accepted;
  for (std::size_t i = 0; i < instance.bids.size(); ++i)
    if (result.allocation.accepted[i]) accepted.push_back(instance.bids[i].id);
  return {{"solver", result.solver},
          {"welfare", result.welfare()},
          {"accepted", accepted},
          {"time_ms", result.wall_time * 1e3},
          {"optimal", result.proven_optimal}};
}

inline Json to_json(const EvalReport& r) {
  Json pairs = Json::array();
  for (auto [p, t] : r.pairs) pairs.push_back({{"predicted", p}, {"true", t}});
  return {{"mae", r.mae},
          {"pearson_r", r.pearson_degenerate ? Json(nullptr) : Json(r.pearson_r)},
          {"accuracy", r.accuracy},
          {"precision", r.precision},
          {"recall", r.recall},
          {"threshold", r.threshold},
          {"confusion",
           {{"tp", r.true_positive}, {"fp", r.false_positive}, {"tn", r.true_negative},
            {"fn", r.false_negative}}},
          {"pairs", pairs}};
}

inline Json to_json(const HybridReport& r) {
  return {{"policy", r.policy},
          {"hard_gap", r.hard_gap},
          {"easy_gap", r.easy_gap},
          {"overall_gap", r.overall_gap},
          {"routing_accuracy", r.routing_accuracy},
          {"num_hard", r.num_hard},
          {"num_easy", r.num_easy}};
}

// ---------------------------------------------------------------- model

inline Json to_json(const HardnessModel& model) {
  wdp::detail::require_trained(model);
  const auto& n = model.network;
  auto layer = [](std::string_view name, const mlp::Linear& l) {
    return Json{{"name", name},
                {"in", l.in},
                {"out", l.out},
                {"weight", detail::nest(l.weight, l.out, l.in)},
                {"bias", l.bias}};
  };
  auto norm = [](std::string_view name, const mlp::BatchNorm& b) {
    return Json{{"name", name},          {"dim", b.dim},
                {"momentum", b.momentum}, {"epsilon", b.epsilon},
                {"gamma", b.gamma},       {"beta", b.beta},
                {"running_mean", b.running_mean}, {"running_var", b.running_var}};
  };
  Json names = Json::array();
  for (auto name : kFeatureNames) names.push_back(name);
  return {{"schema_version", kModelSchemaVersion},
          {"architecture",
           {{"input", n.input_dim()}, {"hidden", n.hidden_dim()}, {"output", 1},
            {"activation", "relu"}, {"normalization", "batch_norm"}}},
          {"feature_names", names},
          {"feature_mean", model.feature_mean},
          {"feature_std", model.feature_std},
          {"layers", {layer("fc1", n.fc1), layer("fc2", n.fc2), layer("fc3", n.fc3)}},
          {"batch_norm", {norm("bn1", n.bn1), norm("bn2", n.bn2)}},
          {"best_epoch", model.best_epoch},
          {"best_validation_mse", model.best_validation_mse}};
}

inline HardnessModel model_from_json(const Json& j) {
  constexpr std::string_view ctx = "model";
  if (detail::field<int>(j, "schema_version", ctx) != kModelSchemaVersion)
    fail(ErrorCode::parse_error, "model: unsupported schema_version");
  const auto arch = detail::field<Json>(j, "architecture", ctx);
  const auto in = detail::field<std::size_t>(arch, "input", "architecture");
  const auto hidden = detail::field<std::size_t>(arch, "hidden", "architecture");
  if (in != kNumFeatures || hidden == 0 || detail::field<std::size_t>(arch, "output", "architecture") != 1)
    fail(ErrorCode::parse_error, "model: architecture does not match 20 -> h -> h -> 1");
  const auto names = detail::field<std::vector<std::string>>(j, "feature_names", ctx);
  if (names.size() != kNumFeatures || !std::equal(names.begin(), names.end(), kFeatureNames.begin()))
    fail(ErrorCode::parse_error, "model: feature names differ from the canonical order");

  HardnessModel model;
  model.network = mlp::Network(in, hidden);
  const auto mean = detail::vector_of(j, "feature_mean", kNumFeatures, ctx);
  const auto std_ = detail::vector_of(j, "feature_std", kNumFeatures, ctx);
  std::copy(mean.begin(), mean.end(), model.feature_mean.begin());
  std::copy(std_.begin(), std_.end(), model.feature_std.begin());
  for (double s : model.feature_std)
    if (!(s > 0.0)) fail(ErrorCode::parse_error, "model: feature_std entries must be positive");

  const auto layers = detail::field<Json>(j, "layers", ctx);
  if (!layers.is_array() || layers.size() != 3) fail(ErrorCode::parse_error, "model: needs 3 layers");
  mlp::Linear* targets[] = {&model.network.fc1, &model.network.fc2, &model.network.fc3};
  for (std::size_t l = 0; l < 3; ++l) {
    mlp::Linear& t = *targets[l];
    t.weight = detail::flatten(detail::field<Json>(layers[l], "weight", "layer"), t.out, t.in, "layer");
    t.bias = detail::vector_of(layers[l], "bias", t.out, "layer");
  }
  const auto norms = detail::field<Json>(j, "batch_norm", ctx);
  if (!norms.is_array() || norms.size() != 2)
    fail(ErrorCode::parse_error, "model: needs 2 batch_norm blocks");
  mlp::BatchNorm* bns[] = {&model.network.bn1, &model.network.bn2};
  for (std::size_t b = 0; b < 2; ++b) {
    mlp::BatchNorm& t = *bns[b];
    t.momentum = detail::field<double>(norms[b], "momentum", "batch_norm");
    t.epsilon = detail::field<double>(norms[b], "epsilon", "batch_norm");
    t.gamma = detail::vector_of(norms[b], "gamma", hidden, "batch_norm");
    t.beta = detail::vector_of(norms[b], "beta", hidden, "batch_norm");
    t.running_mean = detail::vector_of(norms[b], "running_mean", hidden, "batch_norm");
    t.running_var = detail::vector_of(norms[b], "running_var", hidden, "batch_norm");
  }
  model.best_epoch = detail::field<std::size_t>(j, "best_epoch", ctx);
  model.best_validation_mse = detail::field<double>(j, "best_validation_mse", ctx);
  model.trained = true;
  return model;
}

inline void save_model(const std::filesystem::path& path, const HardnessModel& model) {
  write_json(path, to_json(model));
}

inline HardnessModel load_model(const std::filesystem::path& path) {
  return model_from_json(read_json(path));
}

// ------------------------------------------------------------------ CSV

/// Header is the canonical feature names, plus `greedy_gap` when labelled.
inline std::string features_csv(std::span<const FeatureVector> rows,
                                 std::span<const double> gaps = {}) {
  if (!gaps.empty() && gaps.size() != rows.size())
    fail(ErrorCode::invalid_argument, "one label per feature row is required");
  std::string out;
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    if (j) out += ',';
    out += kFeatureNames[j];
  }
  if (!gaps.empty()) out += ",greedy_gap";
  out += '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      if (j) out += ',';
      out += format_double(rows[r][j]);
    }
    if (!gaps.empty()) out += ',' + format_double(gaps[r]);
    out += '\n';
  }
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_double(const std::string& cell, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size())
    fail(ErrorCode::parse_error,
         "line " + std::to_string(line) + ": '" + cell + "' is not a number");
  return v;
}

/// Reads a labelled features CSV written by `features_csv`.
inline FeatureDataset read_features_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::parse_error, "features CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() != kNumFeatures + 1 || header.back() != "greedy_gap")
    fail(ErrorCode::parse_error, "features CSV needs the 20 feature columns and greedy_gap");
  for (std::size_t j = 0; j < kNumFeatures; ++j)
    if (header[j] != kFeatureNames[j])
      fail(ErrorCode::parse_error, "features CSV column " + std::to_string(j + 1) + " is '" +
                                       header[j] + "', expected '" +
                                       std::string(kFeatureNames[j]) + "'");
  FeatureDataset data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != kNumFeatures + 1)
      fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": expected 21 cells");
    FeatureVector f;
    for (std::size_t j = 0; j < kNumFeatures; ++j) f.values[j] = parse_double(cells[j], line_no);
    data.push_back(f, parse_double(cells.back(), line_no));
  }
  return data;
}

inline std::string sweep_csv(std::span<const SweepPoint> curve) {
  std::string out = "threshold,accuracy\n";
  for (const auto& p : curve) out += format_double(p.threshold) + ',' + format_double(p.accuracy) + '\n';
  return out;
}

inline std::string decisions_csv(std::span<const RoutingDecision> decisions) {
  std::string out = "name,tag,decision,gap,cv,predicted_gap\n";
  for (const auto& d : decisions) {
    out += d.name + ',' + std::string(to_string(d.tag)) + ',' + std::string(to_string(d.route)) +
           ',' + format_double(d.gap) + ',' + format_double(d.cv) + ',' +
           (d.predicted_gap ? format_double(*d.predicted_gap) : std::string()) + '\n';
  }
  return out;
}

}  // namespace wdp::io
