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
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace netquant {

// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t mix64(std::uint64_t x);

// Named seed derivation: every consumer of randomness asks for its own
// stream, so adding a consumer never perturbs the draws of another.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name);
std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::uint64_t a);
std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::uint64_t a,
                          std::uint64_t b);

// Stateless uniform draw in [0, 1) keyed on (seed, index). Lets per-node
// fallbacks be computed in any order with identical results.
double keyed_uniform(std::uint64_t seed, std::uint64_t index);

// Seeded generator with portable distributions (the std:: distributions are
// implementation-defined, which would make runs differ across toolchains).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n), unbiased.
  std::uint64_t index(std::uint64_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace netquant
