// train/trainer.h
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

#ifndef TSASR_TRAIN_TRAINER_H_
#define TSASR_TRAIN_TRAINER_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "decode/evaluate.h"
#include "feat/features.h"
#include "losses/losses.h"
#include "net/checkpoint.h"
#include "net/model.h"

namespace tsasr {

struct TrainConfig {
  double peak_lr = 3e-4;
  double weight_decay = 0.01;
  int warmup_steps = 100;
  int total_steps = 2000;
  double min_lr = 1e-6;
  int batch_size = 8;
  LossWeights loss_weights;
  uint64_t seed = 1;
  bool freeze_speaker_encoder = false;
  double grad_clip_norm = 5.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  SpecAugmentPolicy spec_augment;
  int validate_every = 250;
  // Stop as soon as a validation pass finds 0% TS-WER on the training set.
  bool stop_at_zero_train_wer = false;

  // Paper schedule for the given warmup (10K or 25K) and update count.
  static TrainConfig Paper(int warmup_steps, int total_steps);
  void Validate() const;
  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json &j);
};

// Linear ramp from 0 to peak over the warmup, then cosine annealing down to
// min_lr at total_steps. Throws kContract outside [0, total_steps].
double LrAt(int64_t step, const TrainConfig &cfg);

// Decoupled weight decay Adam. Parameters flagged decay=false (biases and
// normalization gains) are not decayed; frozen parameters are skipped.
class AdamW {
 public:
  AdamW(ParameterStore *store, const TrainConfig &cfg);

  // Consumes the gradients currently held by the parameters. Throws
  // kNonFinite naming the parameter on a NaN or infinite gradient.
  void Step(double lr);
  int64_t step() const { return step_; }

  std::vector<NamedArray> State() const;
  void LoadState(const std::vector<NamedArray> &state, int64_t step);

 private:
  ParameterStore *store_;
  double beta1_, beta2_, eps_, weight_decay_;
  int64_t step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct StepStats {
  int64_t step = 0;  // 1-based index of the update just applied
  double lr = 0.0;
  double loss = 0.0;
  double loss_ctc = 0.0;
  double loss_spec = 0.0;
  double grad_norm = 0.0;  // before clipping
  int used = 0;
  int skipped = 0;  // infeasible CTC instances
};

// The examples in batch position order for update `step` (0-based): a fresh
// permutation of the training set per epoch, drawn from (seed, epoch).
std::vector<int> BatchIndices(int64_t step, int num_examples, const TrainConfig &cfg);

// Forward/backward over one batch, global-norm clipping and one AdamW update
// at learning rate `lr`. Per-example randomness (SpecAugment, dropout)
// derives from (seed, step, position in batch).
StepStats TrainStep(TsAsrModel *model, AdamW *optimizer,
                    const std::vector<PreparedExample> &data, const std::vector<int> &batch,
                    const TrainConfig &cfg, int64_t step, double lr);

struct TrainOptions {
  const std::vector<PreparedExample> *validation = nullptr;
  std::ostream *metrics = nullptr;  // JSON lines
  std::string checkpoint_dir;       // best.ckpt / last.ckpt when nonempty
  const Checkpoint *resume = nullptr;
  // Stop after this many updates in this call (0 = run to total_steps).
  int64_t max_updates = 0;
};

struct TrainResult {
  int64_t steps = 0;
  double final_train_wer = -1.0;  // last measured, -1 when never measured
  double best_valid_wer = -1.0;
  int64_t skipped = 0;
  std::vector<StepStats> history;
};

TrainResult Train(TsAsrModel *model, const std::vector<PreparedExample> &train,
                  const TrainConfig &cfg, const TrainOptions &options = {});

// Snapshot with model and training config plus optimizer state.
Checkpoint MakeTrainingCheckpoint(const TsAsrModel &model, const AdamW &optimizer,
                                  const TrainConfig &cfg, const nlohmann::json &metadata);

}  // namespace tsasr

#endif  // TSASR_TRAIN_TRAINER_H_
