// net/parameters.h
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

#ifndef TSASR_NET_PARAMETERS_H_
#define TSASR_NET_PARAMETERS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "autodiff/tensor.h"
#include "base/random.h"

namespace tsasr {

struct Parameter {
  std::string name;  // module path, e.g. "asr.block0.mhsa.query.weight"
  Shape shape;
  Tensor tensor;     // undefined in a dry-run store
  bool decay = true;  // false for biases and normalization gains
  bool trainable = true;
};

// Owns every parameter of a model in creation order. A dry-run store only
// records names and shapes, which is how parameter counts of configurations
// too large to allocate are obtained.
class ParameterStore {
 public:
  explicit ParameterStore(uint64_t seed, bool dry_run = false) : rng_(seed), dry_run_(dry_run) {}

  // Weights ~ N(0, stddev^2).
  Tensor Normal(const std::string &name, const Shape &shape, double stddev, bool decay = true);
  Tensor Constant(const std::string &name, const Shape &shape, double value, bool decay = false);

  std::vector<Parameter> &all() { return params_; }
  const std::vector<Parameter> &all() const { return params_; }
  const Parameter *Find(std::string_view name) const;
  // Total element count of parameters whose name starts with `prefix`.
  int64_t Count(std::string_view prefix = "") const;
  void SetTrainable(std::string_view prefix, bool trainable);
  bool dry_run() const { return dry_run_; }

 private:
  Tensor Add(const std::string &name, const Shape &shape, std::vector<double> values, bool decay);

  Rng rng_;
  bool dry_run_;
  std::vector<Parameter> params_;
};

}  // namespace tsasr

#endif  // TSASR_NET_PARAMETERS_H_
