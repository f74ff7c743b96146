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

// netquant command-line driver: dataset ingestion, experiments, reports.

#include <omp.h>

#include <CLI11.hpp>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "netquant/config.hpp"
#include "netquant/error.hpp"
#include "netquant/io.hpp"
#include "netquant/pipeline.hpp"
#include "netquant/protocol.hpp"
#include "netquant/synth.hpp"

#ifndef NETQUANT_VERSION
#define NETQUANT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using netquant::ExperimentConfig;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> methods;
  int threads = 0;
  std::optional<double> label_fraction;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* c = cmd->add_option("--config", f.config, "Experiment config (JSON)");
  if (config_required) c->required();
  c->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Root seed; overrides the config");
  cmd->add_option("--out", f.out, "Output directory; overrides the config");
  cmd->add_option("--method", f.methods, "Only run the named method (repeatable)");
  cmd->add_option("--threads", f.threads, "OpenMP threads (0 keeps the runtime default)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--label-fraction", f.label_fraction,
                  "Keep this share of the training labels in every fold")
      ->check(CLI::Range(0.0, 1.0));
}

ExperimentConfig load_config(const CommonFlags& f) {
  netquant::ConfigOverrides o;
  o.seed = f.seed;
  o.label_fraction = f.label_fraction;
  if (!f.out.empty()) o.output = fs::absolute(f.out);
  return netquant::load_experiment_config(f.config, o);
}

netquant::Dataset load_data(const ExperimentConfig& cfg) {
  if (cfg.dataset) return netquant::io::load_dataset(*cfg.dataset);
  if (cfg.synth) return netquant::generate_sbm(*cfg.synth);
  throw netquant::Error("config: no dataset or synth section");
}

std::vector<netquant::MethodGridSpec> filter_methods(const ExperimentConfig& cfg,
                                                     const std::vector<std::string>& wanted) {
  if (wanted.empty()) return cfg.methods;
  std::vector<netquant::MethodGridSpec> out;
  const std::set<std::string> want(wanted.begin(), wanted.end());
  std::set<std::string> seen;
  for (const auto& m : cfg.methods) {
    if (want.count(m.name)) {
      out.push_back(m);
      seen.insert(m.name);
    }
  }
  for (const auto& w : want) {
    if (!seen.count(w)) throw netquant::Error("--method: no method named '" + w + "' in the config");
  }
  return out;
}

void write_manifest(const fs::path& dir, const std::string& command, const std::vector<std::string>& args,
                    const ExperimentConfig* cfg, std::uint64_t seed, const std::vector<std::string>& outputs) {
  nlohmann::ordered_json m;
  m["tool"] = "netquant";
  m["version"] = NETQUANT_VERSION;
  m["compiler"] = __VERSION__;
  m["command"] = command;
  m["args"] = args;
  m["seed"] = seed;
  if (cfg) {
    const std::string canonical = cfg->resolved.dump();
    m["config_hash"] = netquant::config_hash(canonical);
    m["config"] = cfg->resolved;
  }
  m["outputs"] = outputs;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw netquant::Error("cannot write " + (dir / "manifest.json").string());
  out << m.dump(2) << '\n';
}

// Method names such as "xnq/lr" become "xnq_lr" in file names.
std::string file_stem(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return out;
}

void run_evaluation(const ExperimentConfig& cfg, const std::vector<netquant::MethodGridSpec>& methods,
                    const std::string& command, const std::vector<std::string>& args) {
  const auto data = load_data(cfg);
  auto cache = std::make_shared<netquant::EmbeddingCache>();
  std::vector<netquant::EvaluationReport> reports;
  std::vector<std::string> names;
  for (const auto& m : methods) {
    std::cerr << "evaluating " << m.name << " (" << m.grid.size() << " configurations)\n";
    auto grid = netquant::make_method_grid(m.name, m.grid, cache);
    auto report = netquant::run_cross_validation(data, grid, cfg.split, cfg.app);
    for (const auto& s : report.skipped) {
      std::cerr << "skipped APP instance: method " << m.name << ", fold " << s.fold << ", prevalence "
                << netquant::format_double(s.grid_prevalence) << " (pool too small)\n";
    }
    std::cerr << m.name << ": MAE " << netquant::format_double(report.mae_mean) << " +- "
              << netquant::format_double(report.mae_std) << '\n';
    reports.push_back(std::move(report));
    names.push_back(m.name);
  }

  fs::create_directories(cfg.output);
  std::vector<std::string> outputs{"report.csv", "summary.json", "diagonal.csv"};
  netquant::write_report_csv(cfg.output / "report.csv", reports);
  netquant::write_summary_json(cfg.output / "summary.json", names, reports);
  netquant::write_diagonal_csv(cfg.output / "diagonal.csv", netquant::export_diagonal(reports.front()));
  if (reports.size() > 1) {
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const std::string file = "diagonal_" + file_stem(names[i]) + ".csv";
      netquant::write_diagonal_csv(cfg.output / file, netquant::export_diagonal(reports[i]));
      outputs.push_back(file);
    }
  }
  outputs.push_back("manifest.json");
  write_manifest(cfg.output, command, args, &cfg, cfg.seed, outputs);
}

// Component swaps of every aggregative method: the readout on raw
// features, and each alternative quantifier on the same classifier.
std::vector<netquant::MethodGridSpec> ablation_variants(const std::vector<netquant::MethodGridSpec>& methods) {
  using netquant::QuantifierKind;
  std::vector<netquant::MethodGridSpec> out;
  for (const auto& m : methods) {
    out.push_back(m);
    if (m.grid.front().is_baseline()) continue;

    netquant::MethodGridSpec lr{m.name + "/lr", {}};
    std::set<std::string> keys;
    for (auto d : m.grid) {
      std::get<netquant::AggregativeSpec>(d.path).embedder = netquant::Passthrough{};
      d.name = lr.name;
      if (keys.insert(d.key()).second) lr.grid.push_back(d);
    }
    out.push_back(std::move(lr));

    for (auto kind : {QuantifierKind::cc, QuantifierKind::acc, QuantifierKind::pcc, QuantifierKind::pacc,
                      QuantifierKind::sld, QuantifierKind::hdy, QuantifierKind::dys}) {
      if (kind == m.grid.front().quantifier.kind) continue;
      netquant::MethodGridSpec v{m.name + "/" + std::string(netquant::to_string(kind)), {}};
      for (auto d : m.grid) {
        d.quantifier.kind = kind;
        d.name = v.name;
        v.grid.push_back(d);
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

void run_embed(const ExperimentConfig& cfg, const std::vector<netquant::MethodGridSpec>& methods,
               const std::vector<std::string>& args) {
  const netquant::ReservoirConfig* rc = nullptr;
  for (const auto& m : methods) {
    for (const auto& d : m.grid) {
      if (const auto* a = std::get_if<netquant::AggregativeSpec>(&d.path)) {
        rc = std::get_if<netquant::ReservoirConfig>(&a->embedder);
        if (rc) break;
      }
    }
    if (rc) break;
  }
  if (!rc) throw netquant::Error("embed: no method with a reservoir embedder");
  const auto data = load_data(cfg);
  const auto states = netquant::compute_embeddings(data, *rc);
  fs::create_directories(cfg.output);
  netquant::io::write_matrix_binary(cfg.output / "embeddings.bin", *states);
  write_manifest(cfg.output, "embed", args, &cfg, cfg.seed, {"embeddings.bin", "manifest.json"});
  std::cerr << "wrote " << states->rows() << " x " << states->cols() << " embeddings\n";
}

void run_synth(const CommonFlags& f, const netquant::SbmConfig& flags_cfg, const std::vector<std::string>& args) {
  netquant::SbmConfig sbm = flags_cfg;
  std::unique_ptr<ExperimentConfig> cfg;
  fs::path out = f.out.empty() ? fs::path("synth") : fs::path(f.out);
  std::uint64_t seed = 0;
  if (!f.config.empty()) {
    cfg = std::make_unique<ExperimentConfig>(load_config(f));
    if (!cfg->synth) throw netquant::Error("synth: the config has no synth section");
    sbm = *cfg->synth;
    seed = cfg->seed;
    if (f.out.empty()) out = cfg->output;
  } else {
    if (!f.seed) throw netquant::Error("synth: --seed is required without --config");
    seed = *f.seed;
    sbm.seed = seed;
  }
  const auto data = netquant::generate_sbm(sbm);
  fs::create_directories(out);
  netquant::io::write_edge_list(out / "edges.txt", data.graph);
  netquant::io::write_features(out / "features.csv", data.features);
  netquant::io::write_labels(out / "labels.csv", data.labels);
  write_manifest(out, "synth", args, cfg.get(), seed, {"edges.txt", "features.csv", "labels.csv", "manifest.json"});
  std::cerr << "wrote SBM with " << data.graph.node_count() << " nodes and " << data.graph.edge_count()
            << " edges to " << out.string() << '\n';
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const netquant::ParseError*>(&e)) return "parse";
  if (dynamic_cast<const netquant::ConvergenceError*>(&e)) return "convergence";
  if (dynamic_cast<const netquant::SingleClassError*>(&e)) return "single-class";
  if (dynamic_cast<const netquant::UninformativeClassifierError*>(&e)) return "uninformative-classifier";
  if (dynamic_cast<const netquant::InsufficientPoolError*>(&e)) return "insufficient-pool";
  if (dynamic_cast<const netquant::Error*>(&e)) return "runtime";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid-argument";
  return "internal";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network quantification experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", NETQUANT_VERSION);

  CommonFlags embed_f, eval_f, ablate_f, synth_f;
  auto* embed = app.add_subcommand("embed", "Compute reservoir node embeddings");
  add_common(embed, embed_f, true);
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validated APP evaluation of the configured methods");
  add_common(evaluate, eval_f, true);
  auto* ablate = app.add_subcommand("ablate", "Evaluate embedder and quantifier swaps of each method");
  add_common(ablate, ablate_f, true);
  auto* synth = app.add_subcommand("synth", "Write a two-block SBM dataset");
  add_common(synth, synth_f, false);
  netquant::SbmConfig sbm;
  synth->add_option("--nodes", sbm.node_count, "Node count");
  synth->add_option("--positive-fraction", sbm.positive_fraction, "Share of positive nodes");
  synth->add_option("--p-in", sbm.p_in, "Edge probability within a block");
  synth->add_option("--p-out", sbm.p_out, "Edge probability across blocks");
  synth->add_option("--feature-dim", sbm.feature_dim, "Feature dimension");
  synth->add_option("--feature-shift", sbm.feature_shift, "Class mean offset per dimension");

  CLI11_PARSE(app, argc, argv);
  const std::vector<std::string> args(argv + 1, argv + argc);

  try {
    CommonFlags* f = embed->parsed()      ? &embed_f
                     : evaluate->parsed() ? &eval_f
                     : ablate->parsed()   ? &ablate_f
                                          : &synth_f;
    if (f->threads > 0) omp_set_num_threads(f->threads);

    if (synth->parsed()) {
      run_synth(*f, sbm, args);
      return 0;
    }
    const auto cfg = load_config(*f);
    auto methods = filter_methods(cfg, f->methods);
    if (embed->parsed()) {
      run_embed(cfg, methods, args);
    } else if (evaluate->parsed()) {
      run_evaluation(cfg, methods, "evaluate", args);
    } else {
      run_evaluation(cfg, ablation_variants(methods), "ablate", args);
    }
  } catch (const std::exception& e) {
    std::cerr << "error[" << error_kind(e) << "]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
