// autodiff/tensor.cc
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

#include "autodiff/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "base/tsasr-error.h"

namespace tsasr {

int64_t NumElements(const Shape &shape) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string ShapeToString(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
  for (int d : shape)
    if (d < 0) Fail(ErrorKind::kShape, "negative dimension in " + ShapeToString(shape));
  if (NumElements(shape) != static_cast<int64_t>(values.size()))
    Fail(ErrorKind::kShape, "shape " + ShapeToString(shape) + " does not match " +
                                std::to_string(values.size()) + " values");
  node_ = std::make_shared<internal::Node>();
  node_->shape = std::move(shape);
  node_->value = std::move(values);
  node_->requires_grad = requires_grad;
  if (requires_grad) node_->grad.assign(node_->value.size(), 0.0);
}

Tensor Tensor::Zeros(const Shape &shape, bool requires_grad) {
  return Tensor(shape, std::vector<double>(NumElements(shape), 0.0), requires_grad);
}

Tensor Tensor::Filled(const Shape &shape, double value) {
  return Tensor(shape, std::vector<double>(NumElements(shape), value));
}

Tensor Tensor::Scalar(double value) { return Tensor({}, {value}); }

const Shape &Tensor::shape() const {
  if (!node_) Fail(ErrorKind::kContract, "use of an undefined tensor");
  return node_->shape;
}

int Tensor::dim(int axis) const {
  int r = rank();
  int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r)
    Fail(ErrorKind::kShape, "axis " + std::to_string(axis) + " out of range for " +
                                ShapeToString(shape()));
  return node_->shape[a];
}

double Tensor::item() const {
  if (size() != 1)
    Fail(ErrorKind::kContract, "item() on non-scalar " + ShapeToString(shape()));
  return node_->value[0];
}

double Tensor::at(int row, int col) const {
  return node_->value[static_cast<int64_t>(row) * node_->shape.back() + col];
}

void Tensor::set_requires_grad(bool requires_grad) {
  node_->requires_grad = requires_grad;
  if (!requires_grad)
    node_->grad.clear();
  else if (node_->grad.size() != node_->value.size())
    node_->grad.assign(node_->value.size(), 0.0);
}

void Tensor::ZeroGrad() { node_->grad.assign(node_->value.size(), 0.0); }

Tensor Tensor::Detach() const { return Tensor(node_->shape, node_->value, false); }

Tensor Tensor::MakeOp(const char *op, Shape shape, std::vector<double> values,
                      std::vector<Tensor> inputs, Pullback pullback) {
  Tensor out(std::move(shape), std::move(values), false);
  bool any = std::any_of(inputs.begin(), inputs.end(), [](const Tensor &t) {
    return t.defined() && t.requires_grad();
  });
  out.node_->op = op;
  if (any) {
    out.node_->requires_grad = true;
    out.node_->pullback = std::move(pullback);
    out.node_->inputs.reserve(inputs.size());
    for (auto &t : inputs) out.node_->inputs.push_back(t.node_);
  }
  return out;
}

void Tensor::Backward() const {
  if (size() != 1)
    Fail(ErrorKind::kContract,
         "backward() requires a scalar loss, got " + ShapeToString(shape()));
  if (!std::isfinite(node_->value[0]))
    Fail(ErrorKind::kNonFinite, std::string("non-finite loss produced by op '") +
                                    node_->op + "'");
  if (!node_->requires_grad) return;

  // Iterative post-order DFS; inputs are visited in declaration order.
  std::vector<internal::Node *> order;
  std::unordered_set<internal::Node *> visited;
  std::vector<std::pair<internal::Node *, size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto &[n, next] = stack.back();
    if (next < n->inputs.size()) {
      internal::Node *child = n->inputs[next++].get();
      if (child && child->requires_grad && visited.insert(child).second)
        stack.emplace_back(child, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  if (node_->grad.size() != 1) node_->grad.assign(1, 0.0);
  node_->grad[0] += 1.0;
  std::vector<std::vector<double> *> slots;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    internal::Node *n = *it;
    if (!n->pullback || n->grad.empty()) continue;
    slots.assign(n->inputs.size(), nullptr);
    for (size_t i = 0; i < n->inputs.size(); ++i) {
      internal::Node *in = n->inputs[i].get();
      if (!in || !in->requires_grad) continue;
      if (in->grad.size() != in->value.size()) in->grad.assign(in->value.size(), 0.0);
      slots[i] = &in->grad;
    }
    n->pullback(n->grad, slots);
    for (auto *g : slots) {
      if (!g) continue;
      for (double v : *g)
        if (!std::isfinite(v))
          Fail(ErrorKind::kNonFinite,
               std::string("non-finite gradient produced by op '") + n->op + "'");
    }
  }
}

void CheckSameShape(const char *op, const Tensor &a, const Tensor &b) {
  if (a.shape() != b.shape())
    Fail(ErrorKind::kShape, std::string(op) + ": shape mismatch " +
                                ShapeToString(a.shape()) + " vs " +
                                ShapeToString(b.shape()));
}

void CheckRank(const char *op, const Tensor &a, int rank) {
  if (a.rank() != rank)
    Fail(ErrorKind::kShape, std::string(op) + ": expected rank " + std::to_string(rank) +
                                ", got " + ShapeToString(a.shape()));
}

}  // namespace tsasr
