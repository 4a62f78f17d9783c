// tests/net-test.cc
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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "autodiff/ops.h"
#include "base/tsasr-error.h"
#include "grad-check.h"
#include "losses/losses.h"
#include "net/checkpoint.h"
#include "net/model.h"

namespace tsasr {
namespace {

using testing::GradCheck;
using testing::RandomProjection;
using testing::RandomTensor;

Matrix RandomFeatures(int frames, int mels, uint64_t seed) {
  Rng rng(seed);
  Matrix m(frames, mels);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = rng.Normal();
  return m;
}

ModelConfig TinyConfig() {
  ModelConfig c;
  ConformerConfig b{1, 8, 8, 2, 3, 0.0, 2, ConvNorm::kLayerNorm};
  c.masknet = b;
  c.asr = b;
  c.n_mels = 8;
  c.subsampler_channels = 2;
  c.speaker_channels = 4;
  c.speaker_attention_dim = 3;
  c.embedding_dim = 4;
  c.vocab_size = 5;
  return c;
}

TEST(SubsamplerTest, OutputLengthIsCeilQuarter) {
  TsAsrModel model(ModelConfig::Desk(), 1);
  EXPECT_EQ(model.Subsample(RandomFeatures(100, 80, 1)).shape(), (Shape{25, 64}));
  for (int T = 8; T <= 41; ++T) {
    Tensor out = model.Subsample(RandomFeatures(T, 80, T));
    EXPECT_EQ(out.dim(0), (T + 3) / 4) << T;
    EXPECT_EQ(out.dim(0), Subsampler::OutputFrames(T));
    EXPECT_EQ(out.dim(1), 64);
  }
}

TEST(SubsamplerTest, TooShortNamesMinimum) {
  TsAsrModel model(ModelConfig::Desk(), 1);
  try {
    model.Subsample(RandomFeatures(7, 80, 1));
    FAIL();
  } catch (const TsasrError &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTooShort);
    EXPECT_NE(std::string(e.what()).find("8 frames"), std::string::npos);
  }
}

TEST(SubsamplerTest, GradientCheck) {
  ParameterStore store(3);
  Subsampler sub(&store, "sub", 8, 2, 4);
  Rng rng(4);
  Tensor x = RandomTensor({9, 8}, &rng);
  std::vector<Tensor> inputs{x, sub.conv1_w, sub.conv1_b, sub.conv2_w, sub.conv2_b, sub.proj.w};
  EXPECT_LT(GradCheck([&] { return RandomProjection(sub(x), 5); }, inputs), 1e-4);
}

TEST(ConformerBlockTest, ShapeAndGradient) {
  ConformerConfig cfg{1, 8, 12, 2, 3, 0.0, 2, ConvNorm::kLayerNorm};
  for (ConvNorm norm : {ConvNorm::kLayerNorm, ConvNorm::kBatchNorm}) {
    cfg.conv_norm = norm;
    ParameterStore store(6);
    ConformerBlock block(&store, "b", cfg);
    Rng rng(7);
    Tensor x = RandomTensor({5, 8}, &rng);
    // Give the zero-initialised relative bias something to differentiate.
    for (auto &v : block.mhsa.rel_bias.mutable_values()) v = rng.Normal();
    Tensor y = block(x, {});
    EXPECT_EQ(y.shape(), x.shape());
    std::vector<Tensor> inputs{x};
    for (auto &p : store.all()) inputs.push_back(p.tensor);
    EXPECT_LT(GradCheck([&] { return RandomProjection(block(x, {}), 8); }, inputs), 1e-4);
  }
}

TEST(ConformerBlockTest, ZeroSubmodulesLeaveLayerNorm) {
  ConformerConfig cfg = ConformerConfig::Desk();
  ParameterStore store(9);
  ConformerBlock block(&store, "b", cfg);
  for (auto &p : store.all())
    if (p.name.find("final_norm") == std::string::npos && p.name.find("gamma") == std::string::npos)
      std::fill(p.tensor.mutable_values().begin(), p.tensor.mutable_values().end(), 0.0);
  Rng rng(10);
  Tensor x = RandomTensor({6, 64}, &rng, 1.0, false);
  Tensor y = block(x, {});
  Tensor expected = LayerNorm(x, block.final_norm.gamma, block.final_norm.beta);
  for (int64_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], expected[i], 1e-12);
}

TEST(SpeakerEncoderTest, ListEqualsConcatenationAndSize) {
  TsAsrModel model(ModelConfig::Desk(), 2);
  Matrix a = RandomFeatures(30, 80, 1);
  Matrix doubled(60, 80);
  doubled << a, a;
  Tensor e1 = model.EncodeSpeaker({a, a});
  Tensor e2 = model.EncodeSpeaker({doubled});
  ASSERT_EQ(e1.shape(), (Shape{32}));
  for (int i = 0; i < 32; ++i) EXPECT_EQ(e1[i], e2[i]);
  EXPECT_THROW(model.EncodeSpeaker({}), TsasrError);
}

TEST(MaskNetTest, MaskRangeAndExactProduct) {
  TsAsrModel model(ModelConfig::Desk(), 3);
  Tensor s = model.Subsample(RandomFeatures(40, 80, 2));
  Tensor emb = model.EncodeSpeaker({RandomFeatures(30, 80, 3)});
  MaskNetOutput out = model.MaskNet(s, emb, {});
  ASSERT_EQ(out.mask.shape(), s.shape());
  for (int64_t i = 0; i < s.size(); ++i) {
    EXPECT_GT(out.mask[i], 0.0);
    EXPECT_LT(out.mask[i], 1.0);
    EXPECT_EQ(out.masked[i], out.mask[i] * s[i]);
  }
}

TEST(MaskNetTest, ZeroProjectionIgnoresEmbedding) {
  TsAsrModel model(ModelConfig::Desk(), 4);
  for (auto &p : model.parameters().all())
    if (p.name.starts_with("masknet.embedding_proj"))
      std::fill(p.tensor.mutable_values().begin(), p.tensor.mutable_values().end(), 0.0);
  Tensor s = model.Subsample(RandomFeatures(40, 80, 5));
  Tensor m0 = model.MaskNet(s, Tensor::Zeros({32}), {}).mask;
  Tensor m1 = model.MaskNet(s, model.EncodeSpeaker({RandomFeatures(30, 80, 6)}), {}).mask;
  for (int64_t i = 0; i < m0.size(); ++i) EXPECT_EQ(m0[i], m1[i]);
}

TEST(MaskNetTest, EmbeddingReachesEveryBlockInput) {
  ModelConfig cfg = ModelConfig::Desk();
  cfg.masknet.n_layers = 3;
  TsAsrModel model(cfg, 5);
  Tensor s = model.Subsample(RandomFeatures(40, 80, 7));
  Tensor e = model.EncodeSpeaker({RandomFeatures(30, 80, 8)});
  std::vector<double> shifted(e.values().begin(), e.values().end());
  shifted[0] += 0.1;
  auto a = model.MaskNet(s, e, {}).block_inputs;
  auto b = model.MaskNet(s, Tensor({32}, shifted), {}).block_inputs;
  ASSERT_EQ(a.size(), 3u);
  for (size_t k = 0; k < a.size(); ++k) {
    double diff = 0;
    for (int64_t i = 0; i < a[k].size(); ++i) diff = std::max(diff, std::abs(a[k][i] - b[k][i]));
    EXPECT_GT(diff, 0.0) << "block " << k;
  }
  EXPECT_THROW(model.MaskNet(s, Tensor::Zeros({31}), {}), TsasrError);
}

TEST(AsrTest, RowsNormalizedAndNearUniformAtInit) {
  TsAsrModel model(ModelConfig::Desk(), 6);
  Matrix x = RandomFeatures(60, 80, 9);
  ModelOutput out = model.Forward(x, model.EncodeSpeaker({RandomFeatures(30, 80, 10)}), {});
  ASSERT_EQ(out.log_probs.shape(), (Shape{15, 17}));
  EXPECT_EQ(out.log_probs.dim(0), out.masknet.masked.dim(0));
  double worst_gap = 0;
  for (int t = 0; t < 15; ++t) {
    double lse = 0, lo = 1e9, hi = -1e9;
    for (int k = 0; k < 17; ++k) {
      double v = out.log_probs.at(t, k);
      lse += std::exp(v);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    EXPECT_NEAR(std::log(lse), 0.0, 1e-9);
    worst_gap = std::max(worst_gap, hi - lo);
  }
  EXPECT_LT(worst_gap, 1.0);
}

TEST(ReconstructionTest, ShapeAndRepeatedRows) {
  TsAsrModel model(ModelConfig::Desk(), 7);
  Rng rng(11);
  Tensor masked = RandomTensor({25, 64}, &rng, 1.0, false);
  Tensor full = model.Reconstruct(masked, 100);
  ASSERT_EQ(full.shape(), (Shape{100, 80}));
  for (int k = 0; k < 25; ++k)
    for (int r = 1; r < 4; ++r)
      for (int m = 0; m < 80; ++m) ASSERT_EQ(full.at(4 * k + r, m), full.at(4 * k, m));
  EXPECT_EQ(model.Reconstruct(masked, 98).dim(0), 98);
  Tensor padded = model.Reconstruct(masked, 103);
  EXPECT_EQ(padded.at(102, 5), 0.0);
}

Tensor FullLoss(const TsAsrModel &model, const Matrix &mix, const Matrix &aux,
                const Matrix &target, const std::vector<int> &labels) {
  ModelOutput out = model.Forward(mix, model.EncodeSpeaker({aux}), {}, true);
  return CombinedLoss(CtcLoss(out.log_probs, labels),
                      SpectrogramLoss(out.reconstruction, target), {1.0, 0.1});
}

// An untrained reconstruction is nearly orthogonal to an unrelated target,
// where SiSNR sits near its -40 dB floor clamp and has no gradient. Use the
// model's own reconstruction plus noise so the loss is strictly inside.
Matrix CorrelatedTarget(const TsAsrModel &model, const Matrix &mix, const Matrix &aux,
                        uint64_t seed) {
  ModelOutput out = model.Forward(mix, model.EncodeSpeaker({aux}), {}, true);
  Matrix m(out.reconstruction.dim(0), out.reconstruction.dim(1));
  std::copy(out.reconstruction.values().begin(), out.reconstruction.values().end(), m.data());
  return m + 0.3 * m.norm() / std::sqrt(m.size()) * RandomFeatures(m.rows(), m.cols(), seed);
}

TEST(ModelTest, EveryParameterGetsFiniteNonzeroGradient) {
  TsAsrModel model(ModelConfig::Desk(), 8);
  Matrix mix = RandomFeatures(48, 80, 12), aux = RandomFeatures(30, 80, 13);
  Matrix target = CorrelatedTarget(model, mix, aux, 14);
  FullLoss(model, mix, aux, target, {3, 16, 5}).Backward();
  for (const auto &p : model.parameters().all()) {
    ASSERT_EQ(p.tensor.grad().size(), p.tensor.values().size()) << p.name;
    double norm = 0;
    for (double g : p.tensor.grad()) {
      ASSERT_TRUE(std::isfinite(g)) << p.name;
      norm += g * g;
    }
    EXPECT_GT(norm, 0.0) << p.name;
  }
}

TEST(ModelTest, ReconstructionLossReachesMaskNet) {
  TsAsrModel model(ModelConfig::Desk(), 9);
  Matrix mix = RandomFeatures(40, 80, 15);
  ModelOutput out = model.Forward(mix, model.EncodeSpeaker({RandomFeatures(30, 80, 16)}), {},
                                  true);
  Tensor loss = SpectrogramLoss(out.reconstruction,
                                CorrelatedTarget(model, mix, RandomFeatures(30, 80, 16), 17));
  ASSERT_GT(loss.item(), -40.0);
  ASSERT_LT(loss.item(), 40.0);
  loss.Backward();
  for (const auto &p : model.parameters().all())
    if (p.name.starts_with("masknet.")) {
      double norm = 0;
      for (double g : p.tensor.grad()) norm += g * g;
      EXPECT_GT(norm, 0.0) << p.name;
    }
}

TEST(ModelTest, EndToEndGradientCheckOnSampledCoordinates) {
  TsAsrModel model(TinyConfig(), 10);
  for (auto &p : model.parameters().all())
    if (p.name.find("rel_bias") != std::string::npos)
      for (auto &v : p.tensor.mutable_values()) v = 0.3;
  Matrix mix = RandomFeatures(12, 8, 18), aux = RandomFeatures(10, 8, 19);
  Matrix target = CorrelatedTarget(model, mix, aux, 20);
  std::vector<Tensor> inputs;
  for (auto &p : model.parameters().all()) inputs.push_back(p.tensor);
  auto fn = [&] { return FullLoss(model, mix, aux, target, {1, 4}); };
  EXPECT_LT(GradCheck(fn, inputs, 1e-5, 5, 21), 1e-4);
}

TEST(ModelTest, MaskNetCompositeFiniteDifferenceOnFiveParameters) {
  TsAsrModel model(TinyConfig(), 11);
  Matrix mix = RandomFeatures(12, 8, 22);
  Tensor emb = model.EncodeSpeaker({RandomFeatures(10, 8, 23)});
  auto loss = [&] {
    return RandomProjection(model.MaskNet(model.Subsample(mix), emb, {}).masked, 24);
  };
  loss().Backward();
  Rng rng(25);
  auto &params = model.parameters().all();
  for (int k = 0; k < 5; ++k) {
    auto &p = params[rng.UniformInt(0, static_cast<int>(params.size()) - 1)];
    if (!p.name.starts_with("masknet.") && !p.name.starts_with("subsampler.")) {
      --k;
      continue;
    }
    int i = rng.UniformInt(0, static_cast<int>(p.tensor.size()) - 1);
    double orig = p.tensor[i];
    p.tensor.mutable_values()[i] = orig + 1e-5;
    double fp = loss().item();
    p.tensor.mutable_values()[i] = orig - 1e-5;
    double fm = loss().item();
    p.tensor.mutable_values()[i] = orig;
    double numeric = (fp - fm) / 2e-5, analytic = p.tensor.grad()[i];
    EXPECT_LT(std::abs(numeric - analytic) / std::max(std::abs(numeric) + std::abs(analytic), 1e-8),
              1e-4)
        << p.name;
  }
}

TEST(ModelTest, SameSeedIsBitIdentical) {
  TsAsrModel a(ModelConfig::Desk(), 12), b(ModelConfig::Desk(), 12);
  Matrix mix = RandomFeatures(40, 80, 26), aux = RandomFeatures(30, 80, 27);
  Tensor la = a.Forward(mix, a.EncodeSpeaker({aux}), {}).log_probs;
  Tensor lb = b.Forward(mix, b.EncodeSpeaker({aux}), {}).log_probs;
  for (int64_t i = 0; i < la.size(); ++i) ASSERT_EQ(la[i], lb[i]);
}

TEST(ModelTest, FrozenSpeakerEncoderGetsNoGradient) {
  ModelConfig cfg = ModelConfig::Desk();
  cfg.freeze_speaker_encoder = true;
  TsAsrModel model(cfg, 13);
  Matrix mix = RandomFeatures(40, 80, 28);
  FullLoss(model, mix, RandomFeatures(30, 80, 29), mix, {2}).Backward();
  for (const auto &p : model.parameters().all()) {
    if (p.name.starts_with("speaker_encoder.")) {
      EXPECT_FALSE(p.trainable);
      EXPECT_TRUE(p.tensor.grad().empty()) << p.name;
    }
  }
}

int64_t Lin(int64_t in, int64_t out) { return in * out + out; }

int64_t BlockCount(const ConformerConfig &c) {
  int64_t d = c.d_model;
  int64_t ff = 2 * d + Lin(d, c.d_ff) + Lin(c.d_ff, d);
  int64_t mhsa = 2 * d + 4 * Lin(d, d) + (2 * c.max_relative_position + 1) * c.n_heads;
  int64_t conv = 2 * d + Lin(d, 2 * d) + d * c.conv_kernel + d + 2 * d + Lin(d, d);
  return 2 * ff + mhsa + conv + 2 * d;
}

TEST(CountTest, DeskMatchesClosedForm) {
  ModelConfig c = ModelConfig::Desk();
  int64_t d = 64, C = 16, Cs = 64, A = 32, E = 32;
  int64_t speaker = Cs * 80 * 5 + Cs + Cs * Cs * 3 + Cs + Lin(Cs, A) + Lin(A, 1) + Lin(2 * Cs, E);
  int64_t sub = C * 9 + C + C * C * 9 + C + Lin(C * 20, d);
  int64_t masknet = Lin(E, d) + 2 * BlockCount(c.masknet) + Lin(d, d);
  int64_t asr = 2 * BlockCount(c.asr) + Lin(d, 17);
  int64_t recon = Lin(d, 80);
  auto counts = CountParameters(c);
  EXPECT_EQ(counts["speaker_encoder"], speaker);
  EXPECT_EQ(counts["subsampler"], sub);
  EXPECT_EQ(counts["masknet"], masknet);
  EXPECT_EQ(counts["asr"], asr);
  EXPECT_EQ(counts["recon_head"], recon);
  EXPECT_EQ(counts["total"], speaker + sub + masknet + asr + recon);
  TsAsrModel model(c, 1);
  EXPECT_EQ(model.parameters().Count(), counts["total"]);
}

TEST(CountTest, SingleLinearLayer) {
  ParameterStore store(1);
  LinearLayer layer(&store, "l", 256, 1024);
  EXPECT_EQ(store.Count(), 263168);
}

TEST(CountTest, PaperConfigurationIsReported) {
  auto counts = CountParameters(ModelConfig::Paper());
  // Informative: MaskNet + ASR + subsampler only, against 66.1M trainable.
  int64_t trainable = counts["total"] - counts["speaker_encoder"];
  std::printf("paper-config trainable parameters: %lld (reported 66.1M)\n",
              static_cast<long long>(trainable));
  EXPECT_GT(trainable, 0);
}

std::string TempPath(const std::string &name) {
  return (std::filesystem::temp_directory_path() / ("tsasr-net-test-" + name)).string();
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  TsAsrModel model(ModelConfig::Desk(), 14);
  Checkpoint ckpt = SnapshotModel(model);
  ckpt.step = 42;
  ckpt.optimizer.push_back({"adam.m.x", {2}, {0.5, -1.0 / 3.0}});
  ckpt.metadata = {{"best_wer", 0.25}};
  std::string path = TempPath("roundtrip.ckpt");
  SaveCheckpoint(ckpt, path);
  Checkpoint back = LoadCheckpoint(path);
  EXPECT_EQ(back.step, 42);
  EXPECT_EQ(back.config, ckpt.config);
  EXPECT_EQ(back.metadata["best_wer"], 0.25);
  ASSERT_EQ(back.optimizer.size(), 1u);
  EXPECT_EQ(back.optimizer[0].values[1], -1.0 / 3.0);
  TsAsrModel other(CheckpointModelConfig(back), 99);
  RestoreParameters(back, &other);
  for (size_t i = 0; i < model.parameters().all().size(); ++i) {
    auto a = model.parameters().all()[i].tensor.values();
    auto b = other.parameters().all()[i].tensor.values();
    ASSERT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
  std::remove(path.c_str());
}

TEST(CheckpointTest, CorruptionIsDetected) {
  TsAsrModel model(ModelConfig::Desk(), 15);
  std::string path = TempPath("corrupt.ckpt");
  SaveCheckpoint(SnapshotModel(model), path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(2000);
    char c;
    f.read(&c, 1);
    f.seekp(2000);
    c ^= 0x10;
    f.write(&c, 1);
  }
  try {
    LoadCheckpoint(path);
    FAIL();
  } catch (const TsasrError &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
  }
  {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << "not a checkpoint at all";
  }
  EXPECT_THROW(LoadCheckpoint(path), TsasrError);
  std::remove(path.c_str());
  try {
    LoadCheckpoint(path);
    FAIL();
  } catch (const TsasrError &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

TEST(CheckpointTest, MismatchedModelIsRejected) {
  TsAsrModel model(ModelConfig::Desk(), 16);
  ModelConfig other_cfg = ModelConfig::Desk();
  other_cfg.asr.d_ff = 96;
  TsAsrModel other(other_cfg, 16);
  try {
    RestoreParameters(SnapshotModel(model), &other);
    FAIL();
  } catch (const TsasrError &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
  }
}

TEST(ConfigTest, ValidationAndJson) {
  ModelConfig c = ModelConfig::Desk();
  EXPECT_EQ(ModelConfig::FromJson(c.ToJson()).ToJson(), c.ToJson());
  c.masknet.conv_kernel = 6;
  EXPECT_THROW(c.Validate(), TsasrError);
  c = ModelConfig::Desk();
  c.asr.n_heads = 5;
  EXPECT_THROW(c.Validate(), TsasrError);
  ConformerConfig p = ConformerConfig::Paper();
  EXPECT_EQ(p.n_layers, 18);
  EXPECT_EQ(p.d_model, 256);
  EXPECT_EQ(p.d_ff, 1024);
  EXPECT_EQ(p.n_heads, 4);
  EXPECT_EQ(p.conv_kernel, 31);
  EXPECT_EQ(ModelConfig::Paper().embedding_dim, 192);
}

}  // namespace
}  // namespace tsasr
