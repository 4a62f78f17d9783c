// net/modules.cc
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

#include "net/modules.h"

#include <algorithm>
#include <cmath>

#include "autodiff/ops.h"
#include "base/tsasr-error.h"

namespace tsasr {

LinearLayer::LinearLayer(ParameterStore *store, const std::string &name, int in, int out,
                         double gain, bool bias)
    : w(store->Normal(name + ".weight", {in, out}, gain / std::sqrt(in))) {
  if (bias) b = store->Constant(name + ".bias", {out}, 0.0);
}

Tensor LinearLayer::operator()(const Tensor &x) const { return Linear(x, w, b); }

LayerNormLayer::LayerNormLayer(ParameterStore *store, const std::string &name, int dim)
    : gamma(store->Constant(name + ".gamma", {dim}, 1.0)),
      beta(store->Constant(name + ".beta", {dim}, 0.0)) {}

Tensor LayerNormLayer::operator()(const Tensor &x) const { return LayerNorm(x, gamma, beta); }

FeedForwardModule::FeedForwardModule(ParameterStore *store, const std::string &name,
                                     const ConformerConfig &cfg)
    : norm(store, name + ".norm", cfg.d_model),
      up(store, name + ".up", cfg.d_model, cfg.d_ff, std::sqrt(2.0)),
      down(store, name + ".down", cfg.d_ff, cfg.d_model),
      dropout(cfg.dropout) {}

Tensor FeedForwardModule::operator()(const Tensor &x, RunMode mode) const {
  Tensor h = Dropout(Swish(up(norm(x))), dropout, mode.training, mode.rng);
  return Dropout(down(h), dropout, mode.training, mode.rng);
}

SelfAttentionModule::SelfAttentionModule(ParameterStore *store, const std::string &name,
                                         const ConformerConfig &cfg)
    : norm(store, name + ".norm", cfg.d_model),
      query(store, name + ".query", cfg.d_model, cfg.d_model),
      key(store, name + ".key", cfg.d_model, cfg.d_model),
      value(store, name + ".value", cfg.d_model, cfg.d_model),
      out(store, name + ".out", cfg.d_model, cfg.d_model),
      rel_bias(store->Constant(name + ".rel_bias", {2 * cfg.max_relative_position + 1, cfg.n_heads},
                               0.0)),
      n_heads(cfg.n_heads),
      max_rel(cfg.max_relative_position),
      dropout(cfg.dropout) {}

Tensor SelfAttentionModule::operator()(const Tensor &x, RunMode mode) const {
  const int T = x.dim(0), d = x.dim(1), dk = d / n_heads;
  Tensor h = norm(x);
  Tensor q = query(h), k = key(h), v = value(h);
  std::vector<int> offsets(static_cast<size_t>(T) * T);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < T; ++j) offsets[i * T + j] = std::clamp(j - i, -max_rel, max_rel) + max_rel;
  Tensor bias = Transpose(EmbeddingLookup(rel_bias, offsets));  // [heads, T*T]
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  std::vector<Tensor> heads;
  for (int hd = 0; hd < n_heads; ++hd) {
    Tensor qh = Slice(q, 1, hd * dk, (hd + 1) * dk);
    Tensor kh = Slice(k, 1, hd * dk, (hd + 1) * dk);
    Tensor vh = Slice(v, 1, hd * dk, (hd + 1) * dk);
    Tensor scores = Add(Scale(MatMul(qh, Transpose(kh)), scale),
                        Reshape(Slice(bias, 0, hd, hd + 1), {T, T}));
    heads.push_back(MatMul(Softmax(scores), vh));
  }
  Tensor context = n_heads == 1 ? heads[0] : Concat(heads, 1);
  return Dropout(out(context), dropout, mode.training, mode.rng);
}

ConvolutionModule::ConvolutionModule(ParameterStore *store, const std::string &name,
                                     const ConformerConfig &cfg)
    : norm(store, name + ".norm", cfg.d_model),
      pointwise_in(store, name + ".pointwise_in", cfg.d_model, 2 * cfg.d_model),
      depthwise_w(store->Normal(name + ".depthwise.weight", {cfg.d_model, cfg.conv_kernel},
                                1.0 / std::sqrt(cfg.conv_kernel))),
      depthwise_b(store->Constant(name + ".depthwise.bias", {cfg.d_model}, 0.0)),
      conv_gamma(store->Constant(name + ".conv_norm.gamma", {cfg.d_model}, 1.0)),
      conv_beta(store->Constant(name + ".conv_norm.beta", {cfg.d_model}, 0.0)),
      conv_norm(cfg.conv_norm),
      pointwise_out(store, name + ".pointwise_out", cfg.d_model, cfg.d_model),
      kernel(cfg.conv_kernel),
      dropout(cfg.dropout) {}

Tensor ConvolutionModule::operator()(const Tensor &x, RunMode mode) const {
  const int d = x.dim(1);
  Tensor h = Glu(pointwise_in(norm(x)));
  h = DepthwiseConv1d(h, depthwise_w, depthwise_b, kernel / 2);
  if (conv_norm == ConvNorm::kLayerNorm) {
    h = LayerNorm(h, conv_gamma, conv_beta);
  } else {
    h = BatchNormFolded(h, conv_gamma, conv_beta, std::vector<double>(d, 0.0),
                        std::vector<double>(d, 1.0));
  }
  h = pointwise_out(Swish(h));
  return Dropout(h, dropout, mode.training, mode.rng);
}

ConformerBlock::ConformerBlock(ParameterStore *store, const std::string &name,
                               const ConformerConfig &cfg)
    : ff1(store, name + ".ff1", cfg),
      mhsa(store, name + ".mhsa", cfg),
      conv(store, name + ".conv", cfg),
      ff2(store, name + ".ff2", cfg),
      final_norm(store, name + ".final_norm", cfg.d_model) {}

Tensor ConformerBlock::operator()(const Tensor &x, RunMode mode) const {
  CheckRank("conformer_block", x, 2);
  Tensor h = Add(x, Scale(ff1(x, mode), 0.5));
  h = Add(h, mhsa(h, mode));
  h = Add(h, conv(h, mode));
  h = Add(h, Scale(ff2(h, mode), 0.5));
  return final_norm(h);
}

ConformerStack::ConformerStack(ParameterStore *store, const std::string &name,
                               const ConformerConfig &cfg) {
  blocks.reserve(cfg.n_layers);
  for (int i = 0; i < cfg.n_layers; ++i)
    blocks.emplace_back(store, name + ".block" + std::to_string(i), cfg);
}

namespace {

int HalfCeil(int n) { return (n + 1) / 2; }

}  // namespace

Subsampler::Subsampler(ParameterStore *store, const std::string &name, int n_mels,
                       int channels_, int d_model)
    : conv1_w(store->Normal(name + ".conv1.weight", {channels_, 1, 3, 3}, std::sqrt(2.0 / 9.0))),
      conv1_b(store->Constant(name + ".conv1.bias", {channels_}, 0.0)),
      conv2_w(store->Normal(name + ".conv2.weight", {channels_, channels_, 3, 3},
                            std::sqrt(2.0 / (9.0 * channels_)))),
      conv2_b(store->Constant(name + ".conv2.bias", {channels_}, 0.0)),
      proj(store, name + ".proj", channels_ * HalfCeil(HalfCeil(n_mels)), d_model),
      channels(channels_),
      reduced_mels(HalfCeil(HalfCeil(n_mels))) {}

Tensor Subsampler::operator()(const Tensor &features) const {
  CheckRank("subsample", features, 2);
  const int T = features.dim(0);
  if (T < kMinSubsamplerFrames)
    Fail(ErrorKind::kTooShort, "subsampler needs at least " +
                                   std::to_string(kMinSubsamplerFrames) + " frames, got " +
                                   std::to_string(T));
  Tensor x = Reshape(features, {1, T, features.dim(1)});
  x = Swish(Conv2d(x, conv1_w, conv1_b, 2, 1));
  x = Swish(Conv2d(x, conv2_w, conv2_b, 2, 1));
  const int t_out = x.dim(1);
  // [C, T', F'] -> [T', F' * C]
  x = Transpose(Reshape(x, {channels, t_out * reduced_mels}));
  x = Reshape(x, {t_out, reduced_mels * channels});
  return proj(x);
}

SpeakerEncoder::SpeakerEncoder(ParameterStore *store, const std::string &name,
                               const ModelConfig &cfg)
    : conv1_w(store->Normal(name + ".conv1.weight", {cfg.speaker_channels, cfg.n_mels, 5},
                            std::sqrt(2.0 / (5.0 * cfg.n_mels)))),
      conv1_b(store->Constant(name + ".conv1.bias", {cfg.speaker_channels}, 0.0)),
      conv2_w(store->Normal(name + ".conv2.weight",
                            {cfg.speaker_channels, cfg.speaker_channels, 3},
                            std::sqrt(2.0 / (3.0 * cfg.speaker_channels)))),
      conv2_b(store->Constant(name + ".conv2.bias", {cfg.speaker_channels}, 0.0)),
      attention_hidden(store, name + ".attention.hidden", cfg.speaker_channels,
                       cfg.speaker_attention_dim),
      attention_score(store, name + ".attention.score", cfg.speaker_attention_dim, 1),
      proj(store, name + ".proj", 2 * cfg.speaker_channels, cfg.embedding_dim) {}

Tensor SpeakerEncoder::operator()(const Tensor &features) const {
  CheckRank("encode_speaker", features, 2);
  Tensor h = Swish(Conv1d(features, conv1_w, conv1_b, 1, 2));
  h = Swish(Conv1d(h, conv2_w, conv2_b, 1, 1));  // [T, C]
  const int T = h.dim(0);
  Tensor scores = attention_score(Tanh(attention_hidden(h)));  // [T, 1]
  Tensor weights = Softmax(Reshape(scores, {1, T}));
  Tensor mean = MatMul(weights, h);                              // [1, C]
  Tensor second = MatMul(weights, Mul(h, h));
  Tensor std = Sqrt(AddScalar(Sub(second, Mul(mean, mean)), 1e-5));
  return Reshape(proj(Concat({mean, std}, 1)), {proj.w.dim(1)});
}

}  // namespace tsasr
