// autodiff/ops.h
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

#ifndef TSASR_AUTODIFF_OPS_H_
#define TSASR_AUTODIFF_OPS_H_

#include <vector>

#include "autodiff/tensor.h"
#include "base/random.h"

namespace tsasr {

// Elementwise arithmetic with numpy-style broadcasting.
Tensor Add(const Tensor &a, const Tensor &b);
Tensor Sub(const Tensor &a, const Tensor &b);
Tensor Mul(const Tensor &a, const Tensor &b);
Tensor Div(const Tensor &a, const Tensor &b);
Tensor Scale(const Tensor &a, double factor);
Tensor AddScalar(const Tensor &a, double offset);

// 2-d only: [m,k] x [k,n] -> [m,n].
Tensor MatMul(const Tensor &a, const Tensor &b);
// x [..., in] times w [in, out] plus optional b [out].
Tensor Linear(const Tensor &x, const Tensor &w, const Tensor &b);

Tensor Transpose(const Tensor &a);  // 2-d
Tensor Reshape(const Tensor &a, const Shape &shape);
Tensor Concat(const std::vector<Tensor> &parts, int axis);
// Half-open range [begin, end) along `axis`.
Tensor Slice(const Tensor &a, int axis, int begin, int end);

Tensor Sum(const Tensor &a);
Tensor Mean(const Tensor &a);
// Reduces `axis` away.
Tensor SumAxis(const Tensor &a, int axis);
Tensor MeanAxis(const Tensor &a, int axis);

Tensor Exp(const Tensor &a);
Tensor Log(const Tensor &a);
Tensor Sqrt(const Tensor &a);
Tensor Tanh(const Tensor &a);
Tensor Sigmoid(const Tensor &a);
Tensor Swish(const Tensor &a);
// Splits the last axis in halves (a, b) and returns a * sigmoid(b).
Tensor Glu(const Tensor &a);

// Over the last axis.
Tensor Softmax(const Tensor &a);
Tensor LogSoftmax(const Tensor &a);

// Normalizes over the last axis; gamma and beta have that axis' length.
Tensor LayerNorm(const Tensor &x, const Tensor &gamma, const Tensor &beta,
                 double eps = 1e-5);
// Inference-mode batch norm over the last (channel) axis with frozen
// running statistics; only gamma and beta take part in differentiation.
Tensor BatchNormFolded(const Tensor &x, const Tensor &gamma, const Tensor &beta,
                       const std::vector<double> &running_mean,
                       const std::vector<double> &running_var, double eps = 1e-5);

// Inverted dropout. Identity when !training or p == 0.
Tensor Dropout(const Tensor &x, double p, bool training, Rng *rng);

// x [T, in_ch] (time-major), w [out_ch, in_ch, K], b [out_ch] or undefined.
Tensor Conv1d(const Tensor &x, const Tensor &w, const Tensor &b, int stride, int pad);
// x [T, C], w [C, K], b [C] or undefined; output length T + 2*pad - K + 1.
Tensor DepthwiseConv1d(const Tensor &x, const Tensor &w, const Tensor &b, int pad);
// x [in_ch, H, W], w [out_ch, in_ch, KH, KW], b [out_ch] or undefined.
Tensor Conv2d(const Tensor &x, const Tensor &w, const Tensor &b, int stride, int pad);

// Gathers rows of table [N, D] -> [indices.size(), D].
Tensor EmbeddingLookup(const Tensor &table, const std::vector<int> &indices);
// Nearest-neighbour upsampling along axis 0 of a 2-d tensor.
Tensor RepeatRows(const Tensor &a, int factor);
// Truncates or zero-pads axis 0 of a 2-d tensor to `rows`.
Tensor FitRows(const Tensor &a, int rows);

}  // namespace tsasr

#endif  // TSASR_AUTODIFF_OPS_H_
