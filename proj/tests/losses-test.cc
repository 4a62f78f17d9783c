// tests/losses-test.cc
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

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <vector>

#include "autodiff/ops.h"
#include "base/tsasr-error.h"
#include "ctc-oracle.h"
#include "grad-check.h"
#include "losses/losses.h"

namespace tsasr {
namespace {

using testing::GradCheck;
using testing::RandomTensor;

using testing::BruteForceCtc;

Tensor Normalized(const Shape &shape, Rng *rng) {
  return LogSoftmax(RandomTensor(shape, rng, 1.5, false)).Detach();
}

TEST(CtcTest, SingleFrameSingleLabel) {
  Rng rng(1);
  Tensor lp = Normalized({1, 2}, &rng);
  EXPECT_NEAR(CtcLoss(lp, std::vector<int>{1}).item(), -lp.at(0, 1), 1e-15);
}

TEST(CtcTest, TwoFramesMatchesThreePaths) {
  Rng rng(2);
  Tensor lp = Normalized({2, 2}, &rng);
  auto p = [&](int t, int k) { return std::exp(lp.at(t, k)); };
  double total = p(0, 1) * p(1, 1) + p(0, 1) * p(1, 0) + p(0, 0) * p(1, 1);
  EXPECT_NEAR(CtcLoss(lp, std::vector<int>{1}).item(), -std::log(total), 1e-12);
}

TEST(CtcTest, RepeatedLabelNeedsBlank) {
  Rng rng(3);
  Tensor lp = Normalized({3, 2}, &rng);
  auto p = [&](int t, int k) { return std::exp(lp.at(t, k)); };
  EXPECT_NEAR(CtcLoss(lp, std::vector<int>{1, 1}).item(),
              -std::log(p(0, 1) * p(1, 0) * p(2, 1)), 1e-12);
}

TEST(CtcTest, MatchesEnumerationOnAllSmallInstances) {
  Rng rng(4);
  int checked = 0;
  for (int T = 1; T <= 6; ++T)
    for (int V = 2; V <= 5; ++V)  // columns, blank included
      for (int L = 1; L <= 3; ++L)
        for (int trial = 0; trial < 3; ++trial) {
          std::vector<int> labels(L);
          for (auto &l : labels) l = rng.UniformInt(1, V - 1);
          if (T < CtcMinFrames(labels)) continue;
          Tensor lp = Normalized({T, V}, &rng);
          EXPECT_NEAR(CtcLoss(lp, labels).item(), BruteForceCtc(lp, labels), 1e-9)
              << "T=" << T << " V=" << V << " L=" << L;
          ++checked;
        }
  EXPECT_GT(checked, 100);
}

TEST(CtcTest, GradientMatchesFiniteDifferences) {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor logits = RandomTensor({5, 4}, &rng);
    std::vector<int> labels{rng.UniformInt(1, 3), rng.UniformInt(1, 3)};
    auto fn = [&] { return CtcLoss(LogSoftmax(logits), labels); };
    EXPECT_LT(GradCheck(fn, {logits}), 1e-6);
    Tensor raw = RandomTensor({5, 4}, &rng);
    EXPECT_LT(GradCheck([&] { return CtcLoss(raw, labels); }, {raw}), 1e-6);
  }
}

TEST(CtcTest, LogitGradientSumsToZeroPerFrame) {
  Rng rng(6);
  Tensor logits = RandomTensor({7, 5}, &rng);
  CtcLoss(LogSoftmax(logits), std::vector<int>{2, 2, 4}).Backward();
  for (int t = 0; t < 7; ++t) {
    double sum = 0;
    for (int k = 0; k < 5; ++k) sum += logits.grad()[t * 5 + k];
    EXPECT_NEAR(sum, 0.0, 1e-12);
  }
}

TEST(CtcTest, InfeasibleRaises) {
  Rng rng(7);
  Tensor lp = Normalized({2, 3}, &rng);
  try {
    CtcLoss(lp, std::vector<int>{1, 1});
    FAIL();
  } catch (const TsasrError &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleAlignment);
  }
  EXPECT_THROW(CtcLoss(lp, std::vector<int>{}), TsasrError);
  EXPECT_THROW(CtcLoss(lp, std::vector<int>{0}), TsasrError);
  EXPECT_EQ(CtcMinFrames(std::vector<int>{1, 1, 2, 2, 2}), 8);
}

std::vector<double> Ref8() { return {0.3, -1.2, 0.8, 2.0, -0.5, 0.1, -0.9, 1.4}; }

// Unit vector orthogonal to the centred reference and with zero mean.
std::vector<double> OrthogonalUnit(const std::vector<double> &ref) {
  size_t n = ref.size();
  double mr = 0;
  for (double x : ref) mr += x / n;
  std::vector<double> b(n), v(n);
  for (size_t i = 0; i < n; ++i) b[i] = ref[i] - mr, v[i] = std::sin(1.0 + 2.0 * i);
  double mv = 0;
  for (double x : v) mv += x / n;
  double vb = 0, bb = 0;
  for (size_t i = 0; i < n; ++i) v[i] -= mv, vb += v[i] * b[i], bb += b[i] * b[i];
  double norm = 0;
  for (size_t i = 0; i < n; ++i) v[i] -= vb / bb * b[i], norm += v[i] * v[i];
  for (auto &x : v) x /= std::sqrt(norm);
  return v;
}

TEST(SiSnrTest, PerfectEstimateHitsCeiling) {
  auto ref = Ref8();
  EXPECT_DOUBLE_EQ(SiSnr(ref, ref), 40.0);
  std::vector<double> scaled(ref);
  for (auto &x : scaled) x *= 3.0;
  EXPECT_DOUBLE_EQ(SiSnr(scaled, ref), SiSnr(ref, ref));
}

TEST(SiSnrTest, OrthogonalEstimateHitsFloor) {
  auto ref = Ref8();
  EXPECT_DOUBLE_EQ(SiSnr(OrthogonalUnit(ref), ref), -40.0);
}

TEST(SiSnrTest, MatchesHighPrecisionEvaluation) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  auto ref = Ref8();
  auto noise = OrthogonalUnit(ref);
  std::vector<double> est(8);
  for (int i = 0; i < 8; ++i) est[i] = ref[i] + 0.1 * noise[i];
  Big me = 0, mr = 0;
  for (int i = 0; i < 8; ++i) me += Big(est[i]) / 8, mr += Big(ref[i]) / 8;
  Big ab = 0, bb = 0;
  for (int i = 0; i < 8; ++i) ab += (Big(est[i]) - me) * (Big(ref[i]) - mr);
  for (int i = 0; i < 8; ++i) bb += (Big(ref[i]) - mr) * (Big(ref[i]) - mr);
  Big ss = 0, ee = 0;
  for (int i = 0; i < 8; ++i) {
    Big s = ab / bb * (Big(ref[i]) - mr);
    Big e = Big(est[i]) - me - s;
    ss += s * s;
    ee += e * e;
  }
  Big expected = 10 * log10(ss / (ee + Big(1e-8)));
  EXPECT_NEAR(SiSnr(est, ref), expected.convert_to<double>(), 1e-10);
}

TEST(SiSnrTest, InvariantToOffsetAndScale) {
  Rng rng(8);
  std::vector<double> ref(50), est(50);
  for (int i = 0; i < 50; ++i) ref[i] = rng.Normal(), est[i] = ref[i] + 0.5 * rng.Normal();
  double base = SiSnr(est, ref);
  std::vector<double> e2(est), r2(ref);
  for (auto &x : e2) x += 3.0;
  for (auto &x : r2) x -= 1.5;
  EXPECT_NEAR(SiSnr(e2, r2), base, 1e-12);
  // Scaling moves the residual energy E by alpha^2 relative to the fixed
  // epsilon, which shifts the value by at most (10/ln 10) eps / (alpha^2 E).
  double me = 0, mr = 0, ab = 0, bb = 0, residual = 0;
  for (int i = 0; i < 50; ++i) me += est[i] / 50, mr += ref[i] / 50;
  for (int i = 0; i < 50; ++i)
    ab += (est[i] - me) * (ref[i] - mr), bb += (ref[i] - mr) * (ref[i] - mr);
  for (int i = 0; i < 50; ++i) {
    double e = est[i] - me - ab / bb * (ref[i] - mr);
    residual += e * e;
  }
  for (double alpha : {-2.0, 0.1, 7.0}) {
    std::vector<double> e3(est);
    for (auto &x : e3) x *= alpha;
    double bound = 4.343 * 1e-8 * std::abs(1.0 - 1.0 / (alpha * alpha)) / residual;
    EXPECT_NEAR(SiSnr(e3, ref), base, bound + 1e-12) << alpha;
  }
}

TEST(SiSnrTest, MoreNoiseStrictlyLower) {
  auto ref = Ref8();
  auto noise = OrthogonalUnit(ref);
  double prev = 41.0;
  for (double sigma = 0.001; sigma < 1000.0; sigma *= 1.5) {
    std::vector<double> est(8);
    for (int i = 0; i < 8; ++i) est[i] = ref[i] + sigma * noise[i];
    double v = SiSnr(est, ref);
    if (prev > -40.0 && prev < 40.0) {
      EXPECT_LT(v, prev);
    }
    if (v == -40.0) break;
    prev = v;
  }
}

TEST(SiSnrTest, ConstantReferenceIsDegenerate) {
  std::vector<double> ref(6, 2.0), est{1, 2, 3, 4, 5, 6};
  try {
    SiSnr(est, ref);
    FAIL();
  } catch (const TsasrError &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateReference);
  }
}

TEST(SpectrogramLossTest, ClampAndScaleInvariance) {
  Rng rng(9);
  Matrix target = Matrix::Random(12, 80);
  Tensor est({12, 80}, std::vector<double>(target.data(), target.data() + target.size()));
  EXPECT_DOUBLE_EQ(SpectrogramLoss(est, target).item(), -40.0);
  EXPECT_DOUBLE_EQ(SpectrogramLoss(Scale(est, 2.0), target).item(), -40.0);
  EXPECT_THROW(SpectrogramLoss(Tensor::Zeros({11, 80}), target), TsasrError);
}

TEST(SpectrogramLossTest, GradientMatchesFiniteDifferences) {
  Rng rng(10);
  for (int trial = 0; trial < 4; ++trial) {
    Matrix target(6, 5);
    for (int i = 0; i < target.size(); ++i) target.data()[i] = rng.Normal();
    Tensor est = RandomTensor({6, 5}, &rng);
    double v = SpectrogramLoss(est, target).item();
    ASSERT_GT(v, -40.0);
    ASSERT_LT(v, 40.0);
    EXPECT_LT(GradCheck([&] { return SpectrogramLoss(est, target); }, {est}), 1e-5);
  }
}

TEST(CombinedLossTest, Weights) {
  Tensor ctc = Tensor::Scalar(2.0), spec = Tensor::Scalar(-30.0);
  EXPECT_DOUBLE_EQ(CombinedLoss(ctc, spec, {1.0, 0.1}).item(), -1.0);
  EXPECT_DOUBLE_EQ(CombinedLoss(ctc, Tensor::Scalar(NAN), {1.0, 0.0}).item(), 2.0);
  EXPECT_THROW(CombinedLoss(ctc, spec, {0.0, 0.0}), TsasrError);
  EXPECT_THROW(CombinedLoss(ctc, spec, {-1.0, 1.0}), TsasrError);
}

}  // namespace
}  // namespace tsasr
