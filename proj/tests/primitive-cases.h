// tests/primitive-cases.h
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

#ifndef TSASR_TESTS_PRIMITIVE_CASES_H_
#define TSASR_TESTS_PRIMITIVE_CASES_H_

#include <cmath>
#include <functional>
#include <vector>

#include "grad-check.h"

namespace tsasr::testing {

struct GradCase {
  const char *name;
  std::function<double(Rng *)> run;
};

inline double CheckUnary(Tensor (*op)(const Tensor &), Shape shape, Rng *rng,
                         double scale = 1.0, double offset = 0.0) {
  Tensor x = RandomTensor(shape, rng, scale);
  for (auto &v : x.mutable_values()) v += offset;
  return GradCheck([&] { return RandomProjection(op(x), 11); }, {x});
}

// One finite-difference check per autodiff primitive; each returns the
// relative error.
inline std::vector<GradCase> PrimitiveGradCases() {
  return {
      {"add_broadcast",
       [](Rng *r) {
         Tensor a = RandomTensor({3, 4}, r), b = RandomTensor({4}, r);
         return GradCheck([&] { return RandomProjection(Add(a, b), 1); }, {a, b});
       }},
      {"sub",
       [](Rng *r) {
         Tensor a = RandomTensor({2, 3}, r), b = RandomTensor({2, 1}, r);
         return GradCheck([&] { return RandomProjection(Sub(a, b), 1); }, {a, b});
       }},
      {"mul_broadcast",
       [](Rng *r) {
         Tensor a = RandomTensor({3, 1, 2}, r), b = RandomTensor({4, 2}, r);
         return GradCheck([&] { return RandomProjection(Mul(a, b), 1); }, {a, b});
       }},
      {"div",
       [](Rng *r) {
         Tensor a = RandomTensor({5}, r), b = RandomTensor({5}, r);
         for (auto &v : b.mutable_values()) v = 1.5 + std::abs(v);
         return GradCheck([&] { return RandomProjection(Div(a, b), 1); }, {a, b});
       }},
      {"scale", [](Rng *r) {
         Tensor a = RandomTensor({4}, r);
         return GradCheck([&] { return RandomProjection(AddScalar(Scale(a, -2.5), 1.0), 1); }, {a});
       }},
      {"matmul",
       [](Rng *r) {
         Tensor a = RandomTensor({3, 4}, r), b = RandomTensor({4, 5}, r);
         return GradCheck([&] { return RandomProjection(MatMul(a, b), 1); }, {a, b});
       }},
      {"linear",
       [](Rng *r) {
         Tensor x = RandomTensor({2, 3, 4}, r), w = RandomTensor({4, 5}, r), b = RandomTensor({5}, r);
         return GradCheck([&] { return RandomProjection(Linear(x, w, b), 1); }, {x, w, b});
       }},
      {"transpose",
       [](Rng *r) {
         Tensor a = RandomTensor({3, 5}, r);
         return GradCheck([&] { return RandomProjection(Transpose(a), 1); }, {a});
       }},
      {"reshape",
       [](Rng *r) {
         Tensor a = RandomTensor({3, 4}, r);
         return GradCheck([&] { return RandomProjection(Reshape(a, {2, 6}), 1); }, {a});
       }},
      {"concat",
       [](Rng *r) {
         Tensor a = RandomTensor({2, 3}, r), b = RandomTensor({2, 2}, r);
         return GradCheck([&] { return RandomProjection(Concat({a, b}, 1), 1); }, {a, b});
       }},
      {"slice",
       [](Rng *r) {
         Tensor a = RandomTensor({4, 5}, r);
         return GradCheck([&] { return RandomProjection(Slice(a, 1, 1, 4), 1); }, {a});
       }},
      {"sum_mean",
       [](Rng *r) {
         Tensor a = RandomTensor({3, 4}, r);
         return GradCheck([&] { return Add(Mean(Mul(a, a)), Sum(a)); }, {a});
       }},
      {"sum_axis",
       [](Rng *r) {
         Tensor a = RandomTensor({3, 4, 2}, r);
         return GradCheck([&] { return RandomProjection(SumAxis(a, 1), 1); }, {a});
       }},
      {"mean_axis",
       [](Rng *r) {
         Tensor a = RandomTensor({3, 4}, r);
         return GradCheck([&] { return RandomProjection(MeanAxis(a, 0), 1); }, {a});
       }},
      {"exp", [](Rng *r) { return CheckUnary(Exp, {5}, r); }},
      {"log", [](Rng *r) { return CheckUnary(Log, {5}, r, 0.2, 2.0); }},
      {"sqrt", [](Rng *r) { return CheckUnary(Sqrt, {5}, r, 0.2, 2.0); }},
      {"tanh", [](Rng *r) { return CheckUnary(Tanh, {5}, r); }},
      {"sigmoid", [](Rng *r) { return CheckUnary(Sigmoid, {5}, r, 3.0); }},
      {"swish", [](Rng *r) { return CheckUnary(Swish, {5}, r, 2.0); }},
      {"glu", [](Rng *r) { return CheckUnary(Glu, {3, 4}, r); }},
      {"softmax", [](Rng *r) { return CheckUnary(Softmax, {3, 4}, r); }},
      {"log_softmax", [](Rng *r) { return CheckUnary(LogSoftmax, {3, 5}, r); }},
      {"layer_norm",
       [](Rng *r) {
         Tensor x = RandomTensor({3, 5}, r), g = RandomTensor({5}, r), b = RandomTensor({5}, r);
         return GradCheck([&] { return RandomProjection(LayerNorm(x, g, b), 1); }, {x, g, b});
       }},
      {"batch_norm",
       [](Rng *r) {
         Tensor x = RandomTensor({4, 3}, r), g = RandomTensor({3}, r), b = RandomTensor({3}, r);
         std::vector<double> mean = {0.1, -0.2, 0.3}, var = {1.5, 0.5, 2.0};
         return GradCheck(
             [&] { return RandomProjection(BatchNormFolded(x, g, b, mean, var), 1); }, {x, g, b});
       }},
      {"dropout",
       [](Rng *r) {
         Tensor x = RandomTensor({4, 4}, r);
         return GradCheck(
             [&] {
               Rng mask_rng(99);  // same mask on every evaluation
               return RandomProjection(Dropout(x, 0.3, true, &mask_rng), 1);
             },
             {x});
       }},
      {"conv1d",
       [](Rng *r) {
         Tensor x = RandomTensor({5, 3}, r), w = RandomTensor({2, 3, 3}, r), b = RandomTensor({2}, r);
         return GradCheck([&] { return RandomProjection(Conv1d(x, w, b, 2, 1), 1); }, {x, w, b});
       }},
      {"depthwise_conv1d",
       [](Rng *r) {
         Tensor x = RandomTensor({5, 3}, r), w = RandomTensor({3, 3}, r), b = RandomTensor({3}, r);
         return GradCheck([&] { return RandomProjection(DepthwiseConv1d(x, w, b, 1), 1); },
                          {x, w, b});
       }},
      {"conv2d",
       [](Rng *r) {
         Tensor x = RandomTensor({2, 5, 4}, r), w = RandomTensor({3, 2, 3, 3}, r),
                b = RandomTensor({3}, r);
         return GradCheck([&] { return RandomProjection(Conv2d(x, w, b, 2, 1), 1); }, {x, w, b});
       }},
      {"embedding",
       [](Rng *r) {
         Tensor t = RandomTensor({4, 3}, r);
         return GradCheck([&] { return RandomProjection(EmbeddingLookup(t, {2, 0, 2, 3}), 1); },
                          {t});
       }},
      {"repeat_fit_rows",
       [](Rng *r) {
         Tensor a = RandomTensor({3, 2}, r);
         return GradCheck(
             [&] { return Add(RandomProjection(FitRows(RepeatRows(a, 4), 10), 1),
                              RandomProjection(FitRows(a, 5), 2)); },
             {a});
       }},
  };
}

}  // namespace tsasr::testing

#endif  // TSASR_TESTS_PRIMITIVE_CASES_H_
