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

#include <span>

#include "netquant/graph.hpp"
#include "netquant/matrix.hpp"

// Data-parallel inner loops. Every kernel has a plain serial *_reference
// twin that the tests compare against bit for bit; the OpenMP versions
// only partition rows across threads and keep the per-row arithmetic
// identical, so results never depend on the thread count.
namespace netquant::kernels {

// out(i, k) = bias[k] + sum_j w_in(k, j) * x(i, j). Zero features are skipped.
void input_drive(const Matrix& x, const Matrix& w_in, std::span<const double> bias, Matrix& out);
void input_drive_reference(const Matrix& x, const Matrix& w_in, std::span<const double> bias,
                           Matrix& out);

// next(v) = tanh(drive(v) + w_hat * sum_{u in N(v)} prev(u)).
//
// Neighbor states are added in lexicographic order of their values, not in
// node-index order, so relabeling the graph permutes the output rows exactly.
void reservoir_step(const Graph& g, const Matrix& drive, const Matrix& w_hat, const Matrix& prev,
                    Matrix& next);
void reservoir_step_reference(const Graph& g, const Matrix& drive, const Matrix& w_hat,
                              const Matrix& prev, Matrix& next);

// out[i] = sigmoid(w . h(i) + b).
void logistic_scores(const Matrix& h, std::span<const double> w, double b, std::span<double> out);
void logistic_scores_reference(const Matrix& h, std::span<const double> w, double b,
                               std::span<double> out);

// Numerically stable logistic function.
double sigmoid(double z);

}  // namespace netquant::kernels
