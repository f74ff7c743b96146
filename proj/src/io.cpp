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

#include "netquant/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

#include "netquant/error.hpp"

namespace netquant::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary matrix dumps assume a little-endian host");

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& msg) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::vector<Edge> read_edge_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    std::istringstream fields{std::string(s)};
    std::string a, b, extra;
    if (!(fields >> a >> b)) parse_fail(path, lineno, "expected two node indices");
    if (fields >> extra) parse_fail(path, lineno, "unexpected trailing field '" + extra + "'");
    std::uint64_t u = 0, v = 0;
    if (!parse_number(a, u) || !parse_number(b, v)) {
      parse_fail(path, lineno, "node indices must be non-negative integers");
    }
    edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }
  return edges;
}

void write_edge_list(const std::filesystem::path& path, const Graph& g) {
  auto out = open_output(path);
  out << "# " << g.node_count() << " nodes, " << g.edge_count() << " edges\n";
  for (NodeId v = 0; v < g.node_count(); ++v) {
    for (NodeId u : g.neighbors(v)) {
      if (u > v) out << v << ' ' << u << '\n';
    }
  }
}

NodeFeatures read_features(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty()) continue;
    std::size_t count = 0;
    while (true) {
      const auto comma = s.find(',');
      std::string_view field = s.substr(0, comma);
      double value = 0;
      if (!parse_number(field, value)) {
        parse_fail(path, lineno, "bad number '" + std::string(trim(field)) + "'");
      }
      if (!std::isfinite(value)) parse_fail(path, lineno, "non-finite feature value");
      values.push_back(value);
      ++count;
      if (comma == std::string_view::npos) break;
      s.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      parse_fail(path, lineno,
                 "expected " + std::to_string(cols) + " columns, found " + std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(path.string() + ": no feature rows");
  return Matrix(rows, cols, std::move(values));
}

void write_features(const std::filesystem::path& path, const NodeFeatures& x) {
  auto out = open_output(path);
  out << std::setprecision(17);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto r = x.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ',';
      out << r[j];
    }
    out << '\n';
  }
}

LabelSet read_labels(const std::filesystem::path& path, std::size_t node_count) {
  auto in = open_input(path);
  std::vector<Label> labels(node_count, Label::unlabeled);
  std::vector<bool> seen(node_count, false);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto comma = s.find(',');
    if (comma == std::string_view::npos) parse_fail(path, lineno, "expected node_index,label");
    std::string_view idx_field = trim(s.substr(0, comma));
    std::string_view label_field = trim(s.substr(comma + 1));
    std::uint64_t idx = 0;
    if (!parse_number(idx_field, idx)) {
      if (lineno == 1) continue;  // header row
      parse_fail(path, lineno, "bad node index '" + std::string(idx_field) + "'");
    }
    if (idx >= node_count) {
      parse_fail(path, lineno,
                 "node index " + std::to_string(idx) + " out of range for " +
                     std::to_string(node_count) + " nodes");
    }
    if (seen[idx]) parse_fail(path, lineno, "duplicate node index " + std::to_string(idx));
    seen[idx] = true;
    if (label_field == "1") {
      labels[idx] = Label::positive;
    } else if (label_field == "0") {
      labels[idx] = Label::negative;
    } else if (label_field == "?") {
      labels[idx] = Label::unlabeled;
    } else {
      parse_fail(path, lineno, "label must be 0, 1 or ?, got '" + std::string(label_field) + "'");
    }
  }
  return LabelSet(std::move(labels));
}

void write_labels(const std::filesystem::path& path, const LabelSet& labels) {
  auto out = open_output(path);
  out << "node_index,label\n";
  for (NodeId v = 0; v < labels.size(); ++v) {
    const char* text = labels[v] == Label::positive   ? "1"
                       : labels[v] == Label::negative ? "0"
                                                      : "?";
    out << v << ',' << text << '\n';
  }
}

Dataset load_dataset(const DatasetPaths& paths, DatasetStats* stats) {
  for (const auto* p : {&paths.edges, &paths.features, &paths.labels}) {
    if (!std::filesystem::exists(*p)) throw Error("missing input file '" + p->string() + "'");
  }
  Dataset data;
  data.features = read_features(paths.features);
  const std::size_t n = data.features.rows();
  const auto edges = read_edge_list(paths.edges);
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n) {
      throw Error("dimension mismatch: edge (" + std::to_string(e.u) + ", " +
                  std::to_string(e.v) + ") in '" + paths.edges.string() +
                  "' exceeds the " + std::to_string(n) + " feature rows");
    }
  }
  data.graph = build_graph(edges, n);
  data.labels = read_labels(paths.labels, n);
  if (stats) stats->edge_lines = edges.size();
  return data;
}

void write_matrix_binary(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_output(path, true);
  const std::int64_t shape[2] = {static_cast<std::int64_t>(m.rows()),
                                 static_cast<std::int64_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(shape), sizeof(shape));
  out.write(reinterpret_cast<const char*>(m.values().data()),
            static_cast<std::streamsize>(m.values().size() * sizeof(double)));
  if (!out) throw Error("short write to '" + path.string() + "'");
}

Matrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::int64_t shape[2] = {0, 0};
  in.read(reinterpret_cast<char*>(shape), sizeof(shape));
  if (!in || shape[0] < 0 || shape[1] < 0) throw ParseError(path.string() + ": bad header");
  std::vector<double> values(static_cast<std::size_t>(shape[0] * shape[1]));
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw ParseError(path.string() + ": truncated matrix payload");
  return Matrix(static_cast<std::size_t>(shape[0]), static_cast<std::size_t>(shape[1]),
                std::move(values));
}

}  // namespace netquant::io
