// Copyright 2026 The netquant Authors.
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

#include "netquant/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "netquant/error.hpp"
#include "netquant/rng.hpp"

namespace netquant {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw Error("config: " + where + ": " + msg);
}

void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items()) {
    if (!ok.count(k)) fail(where, "unknown key '" + k + "'");
  }
}

template <typename T>
T get_or(const Json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(where + "." + key, "wrong type");
  }
}

std::string get_string(const Json& obj, const char* key, const std::string& fallback, const std::string& where) {
  return get_or<std::string>(obj, key, fallback, where);
}

void collect_axes(const Json& node, const Json::json_pointer& at, std::vector<Json::json_pointer>& out) {
  if (node.is_array()) {
    out.push_back(at);
  } else if (node.is_object()) {
    for (const auto& [k, v] : node.items()) collect_axes(v, at / k, out);
  }
}

EmbedderSpec parse_embedder(const Json& j, std::uint64_t root, const std::string& where) {
  check_keys(j, where, {"type", "dim", "radius", "radius_mode", "input_scale", "bias_scale", "iterations", "seed"});
  const auto type = get_string(j, "type", "reservoir", where);
  if (type == "passthrough") return Passthrough{};
  if (type != "reservoir") fail(where + ".type", "expected reservoir or passthrough");
  ReservoirConfig c;
  c.embedding_dim = get_or<std::size_t>(j, "dim", c.embedding_dim, where);
  c.target_radius = get_or<double>(j, "radius", c.target_radius, where);
  const auto mode = get_string(j, "radius_mode", "absolute", where);
  if (mode == "absolute") {
    c.radius_mode = RadiusMode::absolute;
  } else if (mode == "graph_relative") {
    c.radius_mode = RadiusMode::graph_relative;
  } else {
    fail(where + ".radius_mode", "expected absolute or graph_relative");
  }
  c.input_scale = get_or<double>(j, "input_scale", c.input_scale, where);
  c.bias_scale = get_or<double>(j, "bias_scale", c.bias_scale, where);
  c.iterations = get_or<int>(j, "iterations", c.iterations, where);
  // Shared default seed, so methods that differ only downstream see the
  // same embeddings.
  c.seed = get_or<std::uint64_t>(j, "seed", derive_seed(root, "reservoir"), where);
  return c;
}

BaselineSpec parse_baseline(const Json& j, const std::string& where) {
  check_keys(j, where, {"type", "max_rounds", "init", "mode", "strategy", "radius"});
  BaselineSpec b;
  const auto type = get_string(j, "type", "", where);
  if (type == "wvrn") {
    b.kind = BaselineKind::wvrn;
  } else if (type == "cdq") {
    b.kind = BaselineKind::cdq;
  } else if (type == "enq") {
    b.kind = BaselineKind::enq;
  } else {
    fail(where + ".type", "expected wvrn, cdq or enq");
  }
  b.wvrn.max_rounds = get_or<int>(j, "max_rounds", b.wvrn.max_rounds, where);
  const auto init = get_string(j, "init", "training_draw", where);
  if (init == "training_draw") {
    b.wvrn.base_init = BaseInit::training_draw;
  } else if (init == "abstain") {
    b.wvrn.base_init = BaseInit::abstain;
  } else {
    fail(where + ".init", "expected training_draw or abstain");
  }
  const auto mode = get_string(j, "mode", "louvain", where);
  if (mode == "louvain") {
    b.community_mode = CommunityMode::louvain;
  } else if (mode == "clique_percolation") {
    b.community_mode = CommunityMode::clique_percolation;
  } else {
    fail(where + ".mode", "expected louvain or clique_percolation");
  }
  const auto strategy = get_string(j, "strategy", "frequency", where);
  if (strategy == "frequency") {
    b.community_strategy = CommunityStrategy::frequency;
  } else if (strategy == "density") {
    b.community_strategy = CommunityStrategy::density;
  } else {
    fail(where + ".strategy", "expected frequency or density");
  }
  b.ego.radius = get_or<int>(j, "radius", b.ego.radius, where);
  return b;
}

QuantifierSpec parse_quantifier_spec(const Json& j, const std::string& where) {
  QuantifierSpec q;
  if (j.is_string()) {
    q.kind = parse_quantifier(j.get<std::string>());
    return q;
  }
  check_keys(j, where, {"type", "rate_folds", "floor", "tolerance", "max_iterations", "bins", "alpha_step"});
  q.kind = parse_quantifier(get_string(j, "type", "sld", where));
  q.rate_folds = get_or<int>(j, "rate_folds", q.rate_folds, where);
  q.denominator_floor = get_or<double>(j, "floor", q.denominator_floor, where);
  q.sld.tolerance = get_or<double>(j, "tolerance", q.sld.tolerance, where);
  q.sld.max_iterations = get_or<int>(j, "max_iterations", q.sld.max_iterations, where);
  q.bins = get_or<int>(j, "bins", q.bins, where);
  q.alpha_step = get_or<double>(j, "alpha_step", q.alpha_step, where);
  return q;
}

MethodDescriptor parse_method(const Json& j, std::uint64_t root, const std::string& where) {
  check_keys(j, where, {"name", "embedder", "readout", "baseline", "quantifier", "seed"});
  MethodDescriptor d;
  d.name = get_string(j, "name", "", where);
  if (d.name.empty()) fail(where, "missing name");
  d.seed = get_or<std::uint64_t>(j, "seed", derive_seed(root, "method/" + d.name), where);
  if (j.contains("baseline")) {
    if (j.contains("embedder") || j.contains("readout")) {
      fail(where, "a baseline method takes no embedder or readout");
    }
    d.path = parse_baseline(j.at("baseline"), where + ".baseline");
  } else {
    AggregativeSpec a;
    a.embedder = parse_embedder(j.value("embedder", Json::object()), root, where + ".embedder");
    const Json r = j.value("readout", Json::object());
    check_keys(r, where + ".readout", {"lambda", "budget"});
    a.readout.lambda = get_or<double>(r, "lambda", a.readout.lambda, where + ".readout");
    a.readout.optimizer_budget = get_or<int>(r, "budget", a.readout.optimizer_budget, where + ".readout");
    d.path = a;
  }
  if (!j.contains("quantifier")) fail(where, "missing quantifier");
  try {
    d.quantifier = parse_quantifier_spec(j.at("quantifier"), where + ".quantifier");
  } catch (const std::invalid_argument& e) {
    fail(where + ".quantifier", e.what());
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return d;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

std::vector<nlohmann::ordered_json> expand_grid(const nlohmann::ordered_json& method) {
  std::vector<Json::json_pointer> axes;
  collect_axes(method, Json::json_pointer{}, axes);
  std::vector<Json> out;
  std::vector<std::size_t> idx(axes.size(), 0);
  for (const auto& a : axes) {
    if (method.at(a).empty()) throw Error("config: empty hyperparameter list at " + a.to_string());
  }
  while (true) {
    Json j = method;
    for (std::size_t i = 0; i < axes.size(); ++i) j[axes[i]] = method.at(axes[i]).at(idx[i]);
    out.push_back(std::move(j));
    std::size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++idx[k] < method.at(axes[k]).size()) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::filesystem::path& base_dir,
                                         const ConfigOverrides& overrides) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  check_keys(j, "config", {"seed", "dataset", "synth", "split", "app", "output", "methods"});
  if (overrides.seed) j["seed"] = *overrides.seed;
  if (!j.contains("seed")) fail("config", "a seed is required (set \"seed\" or pass --seed)");
  if (overrides.label_fraction) j["split"]["label_fraction"] = *overrides.label_fraction;
  if (overrides.output) j["output"] = overrides.output->string();

  ExperimentConfig cfg;
  cfg.seed = get_or<std::uint64_t>(j, "seed", 0, "config");

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    check_keys(d, "dataset", {"edges", "features", "labels"});
    io::DatasetPaths p;
    p.edges = resolve(base_dir, get_string(d, "edges", "", "dataset"));
    p.features = resolve(base_dir, get_string(d, "features", "", "dataset"));
    p.labels = resolve(base_dir, get_string(d, "labels", "", "dataset"));
    for (const auto* path : {&p.edges, &p.features, &p.labels}) {
      if (!std::filesystem::exists(*path)) fail("dataset", "missing file " + path->string());
    }
    cfg.dataset = p;
  } else if (j.contains("synth")) {
    const auto& s = j.at("synth");
    check_keys(s, "synth", {"nodes", "positive_fraction", "p_in", "p_out", "feature_dim", "feature_shift",
                            "feature_noise", "seed"});
    SbmConfig c;
    c.node_count = get_or<std::size_t>(s, "nodes", c.node_count, "synth");
    c.positive_fraction = get_or<double>(s, "positive_fraction", c.positive_fraction, "synth");
    c.p_in = get_or<double>(s, "p_in", c.p_in, "synth");
    c.p_out = get_or<double>(s, "p_out", c.p_out, "synth");
    c.feature_dim = get_or<std::size_t>(s, "feature_dim", c.feature_dim, "synth");
    c.feature_shift = get_or<double>(s, "feature_shift", c.feature_shift, "synth");
    c.feature_noise = get_or<double>(s, "feature_noise", c.feature_noise, "synth");
    c.seed = get_or<std::uint64_t>(s, "seed", derive_seed(cfg.seed, "synth"), "synth");
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      fail("synth", e.what());
    }
    cfg.synth = c;
  }

  const Json split = j.value("split", Json::object());
  check_keys(split, "split", {"folds", "train", "calibration", "validation", "label_fraction"});
  cfg.split.fold_count = get_or<int>(split, "folds", cfg.split.fold_count, "split");
  cfg.split.train_fraction = get_or<double>(split, "train", cfg.split.train_fraction, "split");
  cfg.split.calibration_fraction = get_or<double>(split, "calibration", cfg.split.calibration_fraction, "split");
  cfg.split.validation_fraction = get_or<double>(split, "validation", cfg.split.validation_fraction, "split");
  cfg.split.label_fraction = get_or<double>(split, "label_fraction", cfg.split.label_fraction, "split");
  cfg.split.seed = derive_seed(cfg.seed, "split");

  const Json app = j.value("app", Json::object());
  check_keys(app, "app", {"grid", "grid_step", "instances", "sample_size"});
  if (app.contains("grid") && app.contains("grid_step")) fail("app", "give grid or grid_step, not both");
  if (app.contains("grid")) {
    cfg.app.prevalence_grid = get_or<std::vector<double>>(app, "grid", {}, "app");
  } else if (app.contains("grid_step")) {
    const double step = get_or<double>(app, "grid_step", 0.05, "app");
    if (!(step > 0.0 && step <= 1.0)) fail("app.grid_step", "must be in (0, 1]");
    const auto steps = static_cast<int>(std::llround(1.0 / step));
    if (std::abs(steps * step - 1.0) > 1e-9) fail("app.grid_step", "must divide 1");
    cfg.app.prevalence_grid.clear();
    for (int i = 0; i <= steps; ++i) cfg.app.prevalence_grid.push_back(static_cast<double>(i) / steps);
  }
  cfg.app.samples_per_run = get_or<int>(app, "instances", cfg.app.samples_per_run, "app");
  cfg.app.sample_size = get_or<std::size_t>(app, "sample_size", cfg.app.sample_size, "app");
  cfg.app.seed = derive_seed(cfg.seed, "app");
  try {
    cfg.split.validate();
    cfg.app.validate();
  } catch (const std::invalid_argument& e) {
    fail("config", e.what());
  }

  cfg.output = resolve(base_dir, get_string(j, "output", "out", "config"));

  if (!j.contains("methods") || !j.at("methods").is_array() || j.at("methods").empty()) {
    fail("config", "methods must be a non-empty list");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < j.at("methods").size(); ++i) {
    const auto& m = j.at("methods").at(i);
    const std::string where = "methods[" + std::to_string(i) + "]";
    if (!m.is_object() || !m.contains("name") || !m.at("name").is_string()) fail(where, "missing name");
    MethodGridSpec spec;
    spec.name = m.at("name").get<std::string>();
    if (!names.insert(spec.name).second) fail(where, "duplicate method name '" + spec.name + "'");
    for (const auto& concrete : expand_grid(m)) spec.grid.push_back(parse_method(concrete, cfg.seed, where));
    cfg.methods.push_back(std::move(spec));
  }
  cfg.resolved = std::move(j);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.parent_path(), overrides);
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace netquant
