// losses/losses.cc
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

#include "losses/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "autodiff/ops.h"
#include "base/tsasr-error.h"

namespace tsasr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

int CtcMinFrames(std::span<const int> labels) {
  int n = static_cast<int>(labels.size());
  for (size_t i = 1; i < labels.size(); ++i) n += labels[i] == labels[i - 1];
  return n;
}

Tensor CtcLoss(const Tensor &log_probs, std::span<const int> labels) {
  CheckRank("ctc_loss", log_probs, 2);
  const int T = log_probs.dim(0), V = log_probs.dim(1);
  if (labels.empty()) Fail(ErrorKind::kContract, "ctc_loss: empty label sequence");
  for (int l : labels)
    if (l <= 0 || l >= V)
      Fail(ErrorKind::kContract, "ctc_loss: label " + std::to_string(l) +
                                     " outside 1.." + std::to_string(V - 1));
  if (T < CtcMinFrames(labels))
    Fail(ErrorKind::kInfeasibleAlignment,
         "ctc_loss: " + std::to_string(T) + " frames cannot emit " +
             std::to_string(labels.size()) + " labels (need " +
             std::to_string(CtcMinFrames(labels)) + ")");

  // Blank-augmented sequence: _ l1 _ l2 _ ... lL _
  const int S = 2 * static_cast<int>(labels.size()) + 1;
  std::vector<int> ext(S, 0);
  for (size_t i = 0; i < labels.size(); ++i) ext[2 * i + 1] = labels[i];
  auto lp = log_probs.values();
  auto emit = [&](int t, int s) { return lp[static_cast<size_t>(t) * V + ext[s]]; };
  auto can_skip = [&](int s) { return s >= 2 && ext[s] != 0 && ext[s] != ext[s - 2]; };

  // alpha includes the emission at t; beta covers frames after t only.
  std::vector<double> alpha(static_cast<size_t>(T) * S, kNegInf);
  std::vector<double> beta(static_cast<size_t>(T) * S, kNegInf);
  alpha[0] = emit(0, 0);
  alpha[1] = emit(0, 1);
  for (int t = 1; t < T; ++t)
    for (int s = 0; s < S; ++s) {
      double acc = alpha[(t - 1) * S + s];
      if (s >= 1) acc = LogAdd(acc, alpha[(t - 1) * S + s - 1]);
      if (can_skip(s)) acc = LogAdd(acc, alpha[(t - 1) * S + s - 2]);
      if (acc != kNegInf) alpha[t * S + s] = acc + emit(t, s);
    }
  beta[(T - 1) * S + S - 1] = 0.0;
  beta[(T - 1) * S + S - 2] = 0.0;
  for (int t = T - 2; t >= 0; --t)
    for (int s = 0; s < S; ++s) {
      double acc = beta[(t + 1) * S + s] + emit(t + 1, s);
      if (s + 1 < S) acc = LogAdd(acc, beta[(t + 1) * S + s + 1] + emit(t + 1, s + 1));
      if (s + 2 < S && can_skip(s + 2))
        acc = LogAdd(acc, beta[(t + 1) * S + s + 2] + emit(t + 1, s + 2));
      beta[t * S + s] = acc;
    }
  const double log_p = LogAdd(alpha[(T - 1) * S + S - 1], alpha[(T - 1) * S + S - 2]);
  if (!std::isfinite(log_p))
    Fail(ErrorKind::kNonFinite, "ctc_loss: total path probability is not finite");

  Pullback pullback = [T, V, S, ext, alpha = std::move(alpha), beta = std::move(beta), log_p](
                          const std::vector<double> &g, std::span<std::vector<double> *const> in) {
    if (!in[0]) return;
    auto &dst = *in[0];
    for (int t = 0; t < T; ++t)
      for (int s = 0; s < S; ++s) {
        double occ = alpha[t * S + s] + beta[t * S + s];
        if (occ == kNegInf) continue;
        dst[static_cast<size_t>(t) * V + ext[s]] -= g[0] * std::exp(occ - log_p);
      }
  };
  return Tensor::MakeOp("ctc_loss", {}, {-log_p}, {log_probs}, std::move(pullback));
}

namespace {

struct SiSnrParts {
  std::vector<double> s, e;  // projection and residual of the centred estimate
  double s_energy = 0, e_energy = 0, value = 0;
  bool clamped = false;
};

SiSnrParts ComputeSiSnr(std::span<const double> est, std::span<const double> ref) {
  if (est.size() != ref.size())
    Fail(ErrorKind::kShape, "sisnr: length " + std::to_string(est.size()) + " vs " +
                                std::to_string(ref.size()));
  const size_t n = est.size();
  if (n < 2) Fail(ErrorKind::kContract, "sisnr: need at least 2 samples");
  double me = 0, mr = 0;
  for (size_t i = 0; i < n; ++i) me += est[i], mr += ref[i];
  me /= n;
  mr /= n;
  std::vector<double> a(n), b(n);
  double ab = 0, bb = 0;
  for (size_t i = 0; i < n; ++i) {
    a[i] = est[i] - me;
    b[i] = ref[i] - mr;
    ab += a[i] * b[i];
    bb += b[i] * b[i];
  }
  if (bb == 0.0) Fail(ErrorKind::kDegenerateReference, "sisnr: reference is constant");
  SiSnrParts p;
  p.s.resize(n);
  p.e.resize(n);
  for (size_t i = 0; i < n; ++i) {
    p.s[i] = ab / bb * b[i];
    p.e[i] = a[i] - p.s[i];
    p.s_energy += p.s[i] * p.s[i];
    p.e_energy += p.e[i] * p.e[i];
  }
  double db = p.s_energy > 0 ? 10.0 * std::log10(p.s_energy / (p.e_energy + kSiSnrEpsilon))
                             : -kSiSnrClampDb;
  p.clamped = db <= -kSiSnrClampDb || db >= kSiSnrClampDb;
  p.value = std::clamp(db, -kSiSnrClampDb, kSiSnrClampDb);
  return p;
}

}  // namespace

double SiSnr(std::span<const double> est, std::span<const double> ref) {
  return ComputeSiSnr(est, ref).value;
}

Tensor SiSnr(const Tensor &est, std::span<const double> ref) {
  SiSnrParts p = ComputeSiSnr(est.values(), ref);
  double value = p.value;
  Pullback pullback = [p = std::move(p)](const std::vector<double> &g,
                                         std::span<std::vector<double> *const> in) {
    if (!in[0] || p.clamped) return;
    // d/da of 10 log10(S / (E + eps)) with S = |s|^2, E = |a|^2 - S; both
    // s and e are already zero-mean, so the centring Jacobian drops out.
    const double k = 10.0 / std::log(10.0);
    auto &dst = *in[0];
    for (size_t i = 0; i < p.s.size(); ++i)
      dst[i] += g[0] * k * (2.0 * p.s[i] / p.s_energy - 2.0 * p.e[i] / (p.e_energy + kSiSnrEpsilon));
  };
  return Tensor::MakeOp("sisnr", {}, {value}, {est}, std::move(pullback));
}

Tensor SpectrogramLoss(const Tensor &est, const Matrix &target) {
  CheckRank("spectrogram_loss", est, 2);
  if (est.dim(0) != target.rows() || est.dim(1) != target.cols())
    Fail(ErrorKind::kShape, "spectrogram_loss: estimate " + ShapeToString(est.shape()) +
                                " vs target [" + std::to_string(target.rows()) + ", " +
                                std::to_string(target.cols()) + "]");
  std::span<const double> ref(target.data(), static_cast<size_t>(target.size()));
  return Scale(SiSnr(est, ref), -1.0);
}

void LossWeights::Validate() const {
  if (!(w_ctc >= 0) || !(w_spec >= 0) || w_ctc + w_spec <= 0)
    Fail(ErrorKind::kConfig, "loss weights must be nonnegative with a positive sum");
}

Tensor CombinedLoss(const Tensor &ctc, const Tensor &spec, const LossWeights &w) {
  w.Validate();
  if (w.w_spec == 0.0) return Scale(ctc, w.w_ctc);
  if (w.w_ctc == 0.0) return Scale(spec, w.w_spec);
  return Add(Scale(ctc, w.w_ctc), Scale(spec, w.w_spec));
}

}  // namespace tsasr
