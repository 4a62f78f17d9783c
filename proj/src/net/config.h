// net/config.h
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

#ifndef TSASR_NET_CONFIG_H_
#define TSASR_NET_CONFIG_H_

#include <string>

#include "json.hpp"

namespace tsasr {

// Normalization inside the Conformer convolution module. Batch norm runs
// with frozen unit statistics (folded), so both variants are per-frame.
enum class ConvNorm { kLayerNorm, kBatchNorm };

struct ConformerConfig {
  int n_layers = 2;
  int d_model = 64;
  int d_ff = 128;
  int n_heads = 4;
  int conv_kernel = 7;
  double dropout = 0.1;
  // Relative offsets beyond +-R share one learned bias per head.
  int max_relative_position = 16;
  ConvNorm conv_norm = ConvNorm::kLayerNorm;

  static ConformerConfig Desk() { return {}; }
  static ConformerConfig Paper() { return {18, 256, 1024, 4, 31, 0.1, 64, ConvNorm::kBatchNorm}; }
  void Validate() const;
};

struct ModelConfig {
  ConformerConfig masknet;
  ConformerConfig asr;
  int n_mels = 80;
  int subsampler_channels = 16;
  int speaker_channels = 64;
  int speaker_attention_dim = 32;
  int embedding_dim = 32;
  int vocab_size = 17;  // blank + 15 letters + word boundary
  bool freeze_speaker_encoder = false;

  static ModelConfig Desk() { return {}; }
  static ModelConfig Paper();
  void Validate() const;

  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json &j);
};

}  // namespace tsasr

#endif  // TSASR_NET_CONFIG_H_
