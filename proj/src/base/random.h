// base/random.h
//
// Copyright 2026  The tsasr Authors
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

#ifndef TSASR_BASE_RANDOM_H_
#define TSASR_BASE_RANDOM_H_

#include <cstdint>
#include <random>
#include <vector>

namespace tsasr {

// Mixes a seed with up to two stream indices (splitmix64 finalizer). Used to
// give every example, step and utterance its own independent stream so that
// results never depend on evaluation order.
uint64_t DeriveSeed(uint64_t seed, uint64_t a, uint64_t b = 0);

// Thin wrapper over mt19937_64. Distributions are computed here rather than
// through <random> distribution objects, whose output is implementation
// defined, so streams are reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [lo, hi] inclusive.
  int UniformInt(int lo, int hi);
  double Normal();
  bool Bernoulli(double p) { return Uniform() < p; }
  // Fisher-Yates.
  std::vector<int> Permutation(int n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tsasr

#endif  // TSASR_BASE_RANDOM_H_
