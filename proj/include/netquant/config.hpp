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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "netquant/io.hpp"
#include "netquant/pipeline.hpp"
#include "netquant/protocol.hpp"
#include "netquant/synth.hpp"

namespace netquant {

struct MethodGridSpec {
  std::string name;
  std::vector<MethodDescriptor> grid;  // one descriptor per hyperparameter combination
};

struct ExperimentConfig {
  std::optional<io::DatasetPaths> dataset;
  std::optional<SbmConfig> synth;  // used when no dataset paths are given
  std::vector<MethodGridSpec> methods;
  SplitPlan split;
  APPConfig app;
  std::filesystem::path output = "out";
  std::uint64_t seed = 0;
  // Canonical form of the input after overrides; stored in the manifest.
  nlohmann::ordered_json resolved;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> label_fraction;
  std::optional<std::filesystem::path> output;
};

// Every array-valued leaf inside a method entry is a hyperparameter axis;
// returns one object per element of their Cartesian product (the first
// axis varies slowest).
std::vector<nlohmann::ordered_json> expand_grid(const nlohmann::ordered_json& method);

// Relative paths resolve against base_dir. Unknown keys are rejected. A seed
// must come from the file or the overrides.
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::filesystem::path& base_dir,
                                         const ConfigOverrides& overrides = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path,
                                        const ConfigOverrides& overrides = {});

// FNV-1a 64 of the text, as 16 hex digits.
std::string config_hash(const std::string& text);

}  // namespace netquant
