// net/parameters.cc
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

#include "net/parameters.h"

#include "base/tsasr-error.h"

namespace tsasr {

Tensor ParameterStore::Add(const std::string &name, const Shape &shape,
                           std::vector<double> values, bool decay) {
  if (Find(name)) Fail(ErrorKind::kContract, "duplicate parameter name " + name);
  Parameter p{name, shape, Tensor(), decay, true};
  if (!dry_run_) p.tensor = Tensor(shape, std::move(values), /*requires_grad=*/true);
  params_.push_back(std::move(p));
  return params_.back().tensor;
}

Tensor ParameterStore::Normal(const std::string &name, const Shape &shape, double stddev,
                              bool decay) {
  std::vector<double> v;
  if (!dry_run_) {
    v.resize(NumElements(shape));
    for (auto &x : v) x = stddev * rng_.Normal();
  }
  return Add(name, shape, std::move(v), decay);
}

Tensor ParameterStore::Constant(const std::string &name, const Shape &shape, double value,
                                bool decay) {
  std::vector<double> v;
  if (!dry_run_) v.assign(NumElements(shape), value);
  return Add(name, shape, std::move(v), decay);
}

const Parameter *ParameterStore::Find(std::string_view name) const {
  for (const auto &p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

int64_t ParameterStore::Count(std::string_view prefix) const {
  int64_t n = 0;
  for (const auto &p : params_)
    if (std::string_view(p.name).starts_with(prefix)) n += NumElements(p.shape);
  return n;
}

void ParameterStore::SetTrainable(std::string_view prefix, bool trainable) {
  for (auto &p : params_)
    if (std::string_view(p.name).starts_with(prefix)) {
      p.trainable = trainable;
      if (p.tensor.defined()) p.tensor.set_requires_grad(trainable);
    }
}

}  // namespace tsasr
