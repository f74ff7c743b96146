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
#include <string>
#include <string_view>
#include <vector>

#include "netquant/matrix.hpp"

namespace netquant {

// Binary labels are passed as 0/1 ints throughout the readout and
// quantifier modules.
using BinaryLabels = std::span<const int>;

struct LinearReadout {
  std::vector<double> weights;
  double bias = 0.0;
  double lambda = 0.0;

  friend bool operator==(const LinearReadout&, const LinearReadout&) = default;
};

// Maps a raw score y to 1 / (1 + exp(a * y + b)).
struct CalibrationParams {
  double a = 0.0;
  double b = 0.0;

  friend bool operator==(const CalibrationParams&, const CalibrationParams&) = default;
};

struct CalibratedClassifier {
  LinearReadout readout;
  CalibrationParams calibration;

  double posterior(std::span<const double> h) const;
  std::vector<double> posteriors(const Matrix& h) const;

  friend bool operator==(const CalibratedClassifier&, const CalibratedClassifier&) = default;
};

// Mean binary cross-entropy plus (lambda / 2) * |w|^2 (the bias is not
// penalized). `params` holds the weights followed by the bias; the gradient
// is written in the same layout.
double logistic_objective(const Matrix& x, BinaryLabels y, double lambda,
                          std::span<const double> params, std::span<double> grad);

// Minimizes logistic_objective with L-BFGS from the zero vector until the
// gradient max-norm drops below 1e-8 or the iteration budget runs out.
// Throws SingleClassError if only one class is present.
LinearReadout train_readout(const Matrix& embeddings, BinaryLabels labels, double lambda,
                            int optimizer_budget = 1000);

double predict_raw(const LinearReadout& r, std::span<const double> h);
std::vector<double> predict_raw(const LinearReadout& r, const Matrix& h);

// Maximum-likelihood (a, b) by Newton's method. Labels are smoothed to
// Platt's targets (N+ + 1) / (N+ + 2) and 1 / (N- + 2), which keeps the
// optimum finite on separable scores. Constant scores yield a = 0 and the
// prior-matching b. Throws SingleClassError on a one-class set.
CalibrationParams fit_calibration(std::span<const double> raw_scores, BinaryLabels labels);

double calibrate(const CalibrationParams& p, double raw);

// The fitted map is decreasing in the raw score when a > 0, i.e. it flips
// the readout's ranking.
inline bool orientation_inverted(const CalibrationParams& p) { return p.a > 0; }

// Plain-text key-value form: dim, weights, bias, lambda, a, b.
std::string serialize(const CalibratedClassifier& c);
CalibratedClassifier parse_classifier(std::string_view text);

}  // namespace netquant
