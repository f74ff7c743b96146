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

#include <stdexcept>
#include <string>

namespace netquant {

// Base class for every failure raised by the library. Precondition
// violations on arguments are reported as std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative method ran out of iterations. Carries the last estimate so
// callers can decide whether it is still usable.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_estimate, int iterations)
      : Error(what), last_estimate_(last_estimate), iterations_(iterations) {}

  double last_estimate() const { return last_estimate_; }
  int iterations() const { return iterations_; }

 private:
  double last_estimate_;
  int iterations_;
};

// A training or calibration set contains a single class.
class SingleClassError : public Error {
 public:
  using Error::Error;
};

// |tpr - fpr| is below the denominator floor, so adjusted counts are undefined.
class UninformativeClassifierError : public Error {
 public:
  using Error::Error;
};

// An APP draw asked for more positives or negatives than the pool holds.
class InsufficientPoolError : public Error {
 public:
  using Error::Error;
};

// Malformed input file. The message names the file and the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace netquant
