// net/modules.h
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

#ifndef TSASR_NET_MODULES_H_
#define TSASR_NET_MODULES_H_

#include <string>
#include <vector>

#include "autodiff/tensor.h"
#include "base/random.h"
#include "net/config.h"
#include "net/parameters.h"

namespace tsasr {

// Dropout and the randomness it needs; inference passes {false, nullptr}.
struct RunMode {
  bool training = false;
  Rng *rng = nullptr;
};

struct LinearLayer {
  Tensor w, b;
  // w ~ N(0, gain^2 / in).
  LinearLayer(ParameterStore *store, const std::string &name, int in, int out,
              double gain = 1.0, bool bias = true);
  Tensor operator()(const Tensor &x) const;
};

struct LayerNormLayer {
  Tensor gamma, beta;
  LayerNormLayer(ParameterStore *store, const std::string &name, int dim);
  Tensor operator()(const Tensor &x) const;
};

struct FeedForwardModule {
  LayerNormLayer norm;
  LinearLayer up, down;
  double dropout;
  FeedForwardModule(ParameterStore *store, const std::string &name, const ConformerConfig &cfg);
  Tensor operator()(const Tensor &x, RunMode mode) const;
};

// Multi-head self-attention with a learned per-head bias indexed by the
// clipped relative offset j - i.
struct SelfAttentionModule {
  LayerNormLayer norm;
  LinearLayer query, key, value, out;
  Tensor rel_bias;  // [2R + 1, n_heads]
  int n_heads, max_rel;
  double dropout;
  SelfAttentionModule(ParameterStore *store, const std::string &name, const ConformerConfig &cfg);
  Tensor operator()(const Tensor &x, RunMode mode) const;
};

// pointwise (d -> 2d) -> GLU -> depthwise conv -> norm -> swish -> pointwise
struct ConvolutionModule {
  LayerNormLayer norm;
  LinearLayer pointwise_in;
  Tensor depthwise_w, depthwise_b;
  Tensor conv_gamma, conv_beta;
  ConvNorm conv_norm;
  LinearLayer pointwise_out;
  int kernel;
  double dropout;
  ConvolutionModule(ParameterStore *store, const std::string &name, const ConformerConfig &cfg);
  Tensor operator()(const Tensor &x, RunMode mode) const;
};

// x + FF/2, + MHSA, + Conv, + FF/2, then LayerNorm.
struct ConformerBlock {
  FeedForwardModule ff1;
  SelfAttentionModule mhsa;
  ConvolutionModule conv;
  FeedForwardModule ff2;
  LayerNormLayer final_norm;
  ConformerBlock(ParameterStore *store, const std::string &name, const ConformerConfig &cfg);
  Tensor operator()(const Tensor &x, RunMode mode) const;
};

constexpr int kMinSubsamplerFrames = 8;

// Two 3x3 stride-2 convolutions with padding 1 over the [T, n_mels] grid,
// each followed by swish. Each halves a length n to ceil(n / 2), so
// T_out = ceil(T / 4) and the mel axis goes to ceil(ceil(n_mels / 2) / 2).
// The [channels, T_out, mels'] result is flattened per frame and projected
// to d_model.
struct Subsampler {
  Tensor conv1_w, conv1_b, conv2_w, conv2_b;
  LinearLayer proj;
  int channels, reduced_mels;
  Subsampler(ParameterStore *store, const std::string &name, int n_mels, int channels,
             int d_model);
  Tensor operator()(const Tensor &features) const;  // [T, n_mels] -> [ceil(T/4), d_model]
  static int OutputFrames(int frames) { return (frames + 3) / 4; }
};

// 1-d conv stack, attentive statistics pooling (weighted mean and standard
// deviation over time) and a projection to the embedding size.
struct SpeakerEncoder {
  Tensor conv1_w, conv1_b, conv2_w, conv2_b;
  LinearLayer attention_hidden, attention_score, proj;
  SpeakerEncoder(ParameterStore *store, const std::string &name, const ModelConfig &cfg);
  Tensor operator()(const Tensor &features) const;  // [T, n_mels] -> [embedding_dim]
};

struct ConformerStack {
  std::vector<ConformerBlock> blocks;
  ConformerStack(ParameterStore *store, const std::string &name, const ConformerConfig &cfg);
};

}  // namespace tsasr

#endif  // TSASR_NET_MODULES_H_
