// net/config.cc
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

#include "net/config.h"

#include "base/tsasr-error.h"

namespace tsasr {

void ConformerConfig::Validate() const {
  auto bad = [](const std::string &msg) { Fail(ErrorKind::kConfig, "conformer: " + msg); };
  if (n_layers < 0) bad("n_layers must be nonnegative");
  if (d_model <= 0 || d_ff <= 0 || n_heads <= 0) bad("sizes must be positive");
  if (d_model % n_heads != 0)
    bad("d_model " + std::to_string(d_model) + " not divisible by n_heads " +
        std::to_string(n_heads));
  if (conv_kernel <= 0 || conv_kernel % 2 == 0)
    bad("conv_kernel must be odd, got " + std::to_string(conv_kernel));
  if (!(dropout >= 0.0 && dropout < 1.0)) bad("dropout must lie in [0, 1)");
  if (max_relative_position < 0) bad("max_relative_position must be nonnegative");
}

ModelConfig ModelConfig::Paper() {
  ModelConfig c;
  c.masknet = ConformerConfig::Paper();
  c.asr = ConformerConfig::Paper();
  c.subsampler_channels = 256;
  c.speaker_channels = 512;
  c.speaker_attention_dim = 128;
  c.embedding_dim = 192;
  c.freeze_speaker_encoder = true;
  return c;
}

void ModelConfig::Validate() const {
  masknet.Validate();
  asr.Validate();
  if (masknet.d_model != asr.d_model)
    Fail(ErrorKind::kConfig, "MaskNet and ASR encoder must share d_model");
  if (n_mels < 4 || subsampler_channels <= 0 || speaker_channels <= 0 ||
      speaker_attention_dim <= 0 || embedding_dim <= 0 || vocab_size < 2)
    Fail(ErrorKind::kConfig, "model sizes must be positive");
}

namespace {

nlohmann::json ConformerToJson(const ConformerConfig &c) {
  return {{"n_layers", c.n_layers},
          {"d_model", c.d_model},
          {"d_ff", c.d_ff},
          {"n_heads", c.n_heads},
          {"conv_kernel", c.conv_kernel},
          {"dropout", c.dropout},
          {"max_relative_position", c.max_relative_position},
          {"conv_norm", c.conv_norm == ConvNorm::kLayerNorm ? "layer" : "batch"}};
}

ConformerConfig ConformerFromJson(const nlohmann::json &j) {
  ConformerConfig c;
  c.n_layers = j.at("n_layers");
  c.d_model = j.at("d_model");
  c.d_ff = j.at("d_ff");
  c.n_heads = j.at("n_heads");
  c.conv_kernel = j.at("conv_kernel");
  c.dropout = j.at("dropout");
  c.max_relative_position = j.at("max_relative_position");
  c.conv_norm = j.at("conv_norm") == "batch" ? ConvNorm::kBatchNorm : ConvNorm::kLayerNorm;
  return c;
}

}  // namespace

nlohmann::json ModelConfig::ToJson() const {
  return {{"masknet", ConformerToJson(masknet)},
          {"asr", ConformerToJson(asr)},
          {"n_mels", n_mels},
          {"subsampler_channels", subsampler_channels},
          {"speaker_channels", speaker_channels},
          {"speaker_attention_dim", speaker_attention_dim},
          {"embedding_dim", embedding_dim},
          {"vocab_size", vocab_size},
          {"freeze_speaker_encoder", freeze_speaker_encoder}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json &j) {
  try {
    ModelConfig c;
    c.masknet = ConformerFromJson(j.at("masknet"));
    c.asr = ConformerFromJson(j.at("asr"));
    c.n_mels = j.at("n_mels");
    c.subsampler_channels = j.at("subsampler_channels");
    c.speaker_channels = j.at("speaker_channels");
    c.speaker_attention_dim = j.at("speaker_attention_dim");
    c.embedding_dim = j.at("embedding_dim");
    c.vocab_size = j.at("vocab_size");
    c.freeze_speaker_encoder = j.at("freeze_speaker_encoder");
    c.Validate();
    return c;
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorKind::kFormat, std::string("model config: ") + e.what());
  }
}

}  // namespace tsasr
