// autodiff/tensor.h
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

#ifndef TSASR_AUTODIFF_TENSOR_H_
#define TSASR_AUTODIFF_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tsasr {

using Shape = std::vector<int>;

int64_t NumElements(const Shape &shape);
std::string ShapeToString(const Shape &shape);

// Receives the gradient of the op output and one slot per input. A slot is
// nullptr when that input does not require a gradient; otherwise it points
// at the input's (already sized) accumulator, which the pullback must add to.
using Pullback = std::function<void(const std::vector<double> &grad_out,
                                    std::span<std::vector<double> *const> grad_in)>;

namespace internal {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  const char *op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  Pullback pullback;
};

}  // namespace internal

// Dense row-major n-d array with an optional place on the define-by-run
// tape. Copies are shallow: two Tensor handles may refer to the same node.
// All data is 64-bit.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor Zeros(const Shape &shape, bool requires_grad = false);
  static Tensor Filled(const Shape &shape, double value);
  static Tensor Scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape &shape() const;
  int rank() const { return static_cast<int>(shape().size()); }
  // Negative axes count from the back.
  int dim(int axis) const;
  int64_t size() const { return static_cast<int64_t>(node_->value.size()); }

  std::span<const double> values() const { return node_->value; }
  // Direct write access, intended for parameters and optimizers. Writing to
  // an interior tape node invalidates any pending backward pass.
  std::span<double> mutable_values() { return node_->value; }
  double item() const;
  double operator[](int64_t i) const { return node_->value[i]; }
  double at(int row, int col) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool requires_grad);
  // Empty until a gradient has been accumulated (or ZeroGrad was called).
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad; }
  void ZeroGrad();

  const char *op_name() const { return node_->op; }
  // New leaf holding a copy of the values; no tape connection.
  Tensor Detach() const;

  // Reverse-mode sweep from this scalar. Nodes are visited in reverse
  // topological order of a deterministic depth-first traversal, so the
  // accumulation order (and hence every rounding) is reproducible.
  void Backward() const;

  // Records an op on the tape. The result joins the graph only when at
  // least one input requires a gradient.
  static Tensor MakeOp(const char *op, Shape shape, std::vector<double> values,
                       std::vector<Tensor> inputs, Pullback pullback);

  bool SameNode(const Tensor &other) const { return node_ == other.node_; }

 private:
  std::shared_ptr<internal::Node> node_;
};

// Shape checks shared by the ops; throw TsasrError(kShape) naming both shapes.
void CheckSameShape(const char *op, const Tensor &a, const Tensor &b);
void CheckRank(const char *op, const Tensor &a, int rank);

}  // namespace tsasr

#endif  // TSASR_AUTODIFF_TENSOR_H_
