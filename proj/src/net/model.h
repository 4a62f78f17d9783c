// net/model.h
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

#ifndef TSASR_NET_MODEL_H_
#define TSASR_NET_MODEL_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "autodiff/tensor.h"
#include "feat/features.h"
#include "net/config.h"
#include "net/modules.h"
#include "net/parameters.h"

namespace tsasr {

Tensor ToTensor(const Matrix &m);

struct MaskNetOutput {
  Tensor mask;    // [T', d_model], sigmoid output
  Tensor masked;  // mask * s_mix_sub
  std::vector<Tensor> block_inputs;  // input of every block after injection
};

struct ModelOutput {
  Tensor s_mix_sub;
  MaskNetOutput masknet;
  Tensor log_probs;       // [T', vocab_size]
  Tensor reconstruction;  // [T_full, n_mels] when requested
};

// Speaker encoder, subsampler, speaker-conditioned MaskNet, Conformer ASR
// encoder with CTC output layer, and the reconstruction head.
class TsAsrModel {
 public:
  TsAsrModel(const ModelConfig &config, uint64_t seed, bool dry_run = false);
  TsAsrModel(const TsAsrModel &) = delete;
  TsAsrModel &operator=(const TsAsrModel &) = delete;

  const ModelConfig &config() const { return config_; }
  ParameterStore &parameters() { return store_; }
  const ParameterStore &parameters() const { return store_; }

  // Auxiliary spectrograms are concatenated along time before encoding.
  // Detached from the tape when the encoder is frozen.
  Tensor EncodeSpeaker(const std::vector<Matrix> &aux) const;
  Tensor Subsample(const Matrix &features) const;
  MaskNetOutput MaskNet(const Tensor &s_mix_sub, const Tensor &embedding, RunMode mode) const;
  Tensor Asr(const Tensor &masked, RunMode mode) const;
  // d_model -> n_mels, 4x nearest-neighbour repeat, then fit to t_full rows.
  Tensor Reconstruct(const Tensor &masked, int t_full) const;

  ModelOutput Forward(const Matrix &mixture, const Tensor &embedding, RunMode mode,
                      bool reconstruct = false) const;

 private:
  ModelConfig config_;
  ParameterStore store_;
  SpeakerEncoder speaker_encoder_;
  Subsampler subsampler_;
  LinearLayer embedding_proj_;
  ConformerStack masknet_;
  LinearLayer mask_out_;
  ConformerStack asr_;
  LinearLayer asr_out_;
  LinearLayer recon_head_;
};

// Parameter counts per top-level module ("speaker_encoder", "subsampler",
// "masknet", "asr", "recon_head") plus "total". Nothing is allocated.
std::map<std::string, int64_t> CountParameters(const ModelConfig &config);

}  // namespace tsasr

#endif  // TSASR_NET_MODEL_H_
