// net/model.cc
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

#include "net/model.h"

#include "autodiff/ops.h"
#include "base/tsasr-error.h"

namespace tsasr {

Tensor ToTensor(const Matrix &m) {
  return Tensor({static_cast<int>(m.rows()), static_cast<int>(m.cols())},
                std::vector<double>(m.data(), m.data() + m.size()));
}

namespace {

const ModelConfig &Validated(const ModelConfig &c) {
  c.Validate();
  return c;
}

}  // namespace

TsAsrModel::TsAsrModel(const ModelConfig &config, uint64_t seed, bool dry_run)
    : config_(Validated(config)),
      store_(seed, dry_run),
      speaker_encoder_(&store_, "speaker_encoder", config_),
      subsampler_(&store_, "subsampler", config_.n_mels, config_.subsampler_channels,
                  config_.masknet.d_model),
      embedding_proj_(&store_, "masknet.embedding_proj", config_.embedding_dim,
                      config_.masknet.d_model),
      masknet_(&store_, "masknet", config_.masknet),
      mask_out_(&store_, "masknet.mask_out", config_.masknet.d_model, config_.masknet.d_model),
      asr_(&store_, "asr", config_.asr),
      // Small output weights keep the untrained posteriors close to uniform.
      asr_out_(&store_, "asr.output", config_.asr.d_model, config_.vocab_size, 0.1),
      recon_head_(&store_, "recon_head", config_.masknet.d_model, config_.n_mels) {
  if (config_.freeze_speaker_encoder) store_.SetTrainable("speaker_encoder.", false);
}

Tensor TsAsrModel::EncodeSpeaker(const std::vector<Matrix> &aux) const {
  if (aux.empty()) Fail(ErrorKind::kContract, "encode_speaker: no auxiliary utterance");
  std::vector<Spectrogram> parts;
  for (const auto &m : aux) {
    if (m.cols() != config_.n_mels)
      Fail(ErrorKind::kShape, "encode_speaker: auxiliary has " + std::to_string(m.cols()) +
                                  " mel bins, expected " + std::to_string(config_.n_mels));
    parts.push_back({m});
  }
  Tensor emb = speaker_encoder_(ToTensor(ConcatSpectrograms(parts).values));
  return config_.freeze_speaker_encoder ? emb.Detach() : emb;
}

Tensor TsAsrModel::Subsample(const Matrix &features) const {
  if (features.cols() != config_.n_mels)
    Fail(ErrorKind::kShape, "subsample: input has " + std::to_string(features.cols()) +
                                " mel bins, expected " + std::to_string(config_.n_mels));
  return subsampler_(ToTensor(features));
}

MaskNetOutput TsAsrModel::MaskNet(const Tensor &s_mix_sub, const Tensor &embedding,
                                  RunMode mode) const {
  if (embedding.size() != config_.embedding_dim)
    Fail(ErrorKind::kShape, "masknet: embedding " + ShapeToString(embedding.shape()) +
                                " vs projection input " + std::to_string(config_.embedding_dim));
  Tensor injected = embedding_proj_(Reshape(embedding, {config_.embedding_dim}));
  MaskNetOutput out;
  Tensor x = s_mix_sub;
  for (const auto &block : masknet_.blocks) {
    x = Add(x, injected);
    out.block_inputs.push_back(x);
    x = block(x, mode);
  }
  out.mask = Sigmoid(mask_out_(x));
  out.masked = Mul(out.mask, s_mix_sub);
  return out;
}

Tensor TsAsrModel::Asr(const Tensor &masked, RunMode mode) const {
  Tensor x = masked;
  for (const auto &block : asr_.blocks) x = block(x, mode);
  return LogSoftmax(asr_out_(x));
}

Tensor TsAsrModel::Reconstruct(const Tensor &masked, int t_full) const {
  return FitRows(RepeatRows(recon_head_(masked), 4), t_full);
}

ModelOutput TsAsrModel::Forward(const Matrix &mixture, const Tensor &embedding, RunMode mode,
                                bool reconstruct) const {
  ModelOutput out;
  out.s_mix_sub = Subsample(mixture);
  out.masknet = MaskNet(out.s_mix_sub, embedding, mode);
  out.log_probs = Asr(out.masknet.masked, mode);
  if (reconstruct)
    out.reconstruction = Reconstruct(out.masknet.masked, static_cast<int>(mixture.rows()));
  return out;
}

std::map<std::string, int64_t> CountParameters(const ModelConfig &config) {
  TsAsrModel model(config, 0, /*dry_run=*/true);
  const auto &store = model.parameters();
  std::map<std::string, int64_t> counts;
  for (const char *m : {"speaker_encoder", "subsampler", "masknet", "asr", "recon_head"})
    counts[m] = store.Count(std::string(m) + ".");
  counts["total"] = store.Count();
  return counts;
}

}  // namespace tsasr
