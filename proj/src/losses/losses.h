// losses/losses.h
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

#ifndef TSASR_LOSSES_LOSSES_H_
#define TSASR_LOSSES_LOSSES_H_

#include <span>
#include <vector>

#include "autodiff/tensor.h"
#include "feat/features.h"

namespace tsasr {

// Frames needed to emit `labels`: one per label plus one blank between each
// pair of equal neighbours.
int CtcMinFrames(std::span<const int> labels);

// Negative log-likelihood of `labels` under a [T, V] grid of per-frame log
// probabilities with blank at index 0. The pullback uses the alpha-beta
// state posteriors, so the gradient with respect to log_probs is exact for
// any input scores. Throws kInfeasibleAlignment when T < CtcMinFrames.
Tensor CtcLoss(const Tensor &log_probs, std::span<const int> labels);

constexpr double kSiSnrEpsilon = 1e-8;
constexpr double kSiSnrClampDb = 40.0;

// Scale-invariant SNR in dB, clamped to [-40, 40]. Throws
// kDegenerateReference when ref is constant.
double SiSnr(std::span<const double> est, std::span<const double> ref);
// Same, differentiable with respect to est. `ref` is a constant.
Tensor SiSnr(const Tensor &est, std::span<const double> ref);

// -SiSnr over the flattened grids. est is [T, n_mels].
Tensor SpectrogramLoss(const Tensor &est, const Matrix &target);

struct LossWeights {
  double w_ctc = 1.0;
  double w_spec = 0.1;

  void Validate() const;
};

Tensor CombinedLoss(const Tensor &ctc, const Tensor &spec, const LossWeights &w);

}  // namespace tsasr

#endif  // TSASR_LOSSES_LOSSES_H_
