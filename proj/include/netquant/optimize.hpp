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

#include <functional>
#include <span>
#include <vector>

namespace netquant {

// Writes the gradient into `grad` and returns the objective value.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;  // on the max-norm of the gradient
  int history = 10;
};

struct LbfgsResult {
  std::vector<double> x;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Deterministic limited-memory BFGS with backtracking (Armijo) line search.
// Intended for smooth convex objectives.
LbfgsResult minimize_lbfgs(const Objective& f, std::vector<double> x0, const LbfgsOptions& options);

}  // namespace netquant
