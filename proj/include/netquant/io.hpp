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

#include <filesystem>
#include <vector>

#include "netquant/graph.hpp"

namespace netquant::io {

// Whitespace-separated index pairs, one per line; '#' lines are comments.
std::vector<Edge> read_edge_list(const std::filesystem::path& path);
void write_edge_list(const std::filesystem::path& path, const Graph& g);

// Header-free CSV, one row per node.
NodeFeatures read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const NodeFeatures& x);

// CSV rows `node_index,label` with label in {0, 1, ?}. An optional header
// row is skipped. Nodes that do not appear are unlabeled.
LabelSet read_labels(const std::filesystem::path& path, std::size_t node_count);
void write_labels(const std::filesystem::path& path, const LabelSet& labels);

struct DatasetPaths {
  std::filesystem::path edges;
  std::filesystem::path features;
  std::filesystem::path labels;
};

struct DatasetStats {
  std::size_t edge_lines = 0;  // pairs read from the edge file, before dedup
};

// Reads the three files and cross-checks their dimensions. The node count
// is taken from the feature file.
Dataset load_dataset(const DatasetPaths& paths, DatasetStats* stats = nullptr);

// Little-endian: int64 rows, int64 cols, then rows*cols float64 row-major.
void write_matrix_binary(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_binary(const std::filesystem::path& path);

}  // namespace netquant::io
