// train/trainer.cc
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

#include "train/trainer.h"

#include <cmath>
#include <filesystem>

#include "autodiff/ops.h"
#include "base/random.h"
#include "base/tsasr-error.h"

namespace tsasr {

TrainConfig TrainConfig::Paper(int warmup_steps, int total_steps) {
  TrainConfig c;
  c.peak_lr = 3e-4;
  c.weight_decay = 0.01;
  c.min_lr = 1e-6;
  c.batch_size = 64;
  c.warmup_steps = warmup_steps;
  c.total_steps = total_steps;
  c.freeze_speaker_encoder = true;
  return c;
}

void TrainConfig::Validate() const {
  auto bad = [](const std::string &m) { Fail(ErrorKind::kConfig, "train config: " + m); };
  if (total_steps <= 0) bad("total_steps must be positive");
  if (warmup_steps < 0 || warmup_steps >= total_steps) bad("need 0 <= warmup_steps < total_steps");
  if (!(min_lr >= 0 && min_lr < peak_lr)) bad("need 0 <= min_lr < peak_lr");
  if (batch_size <= 0) bad("batch_size must be positive");
  if (weight_decay < 0) bad("weight_decay must be nonnegative");
  if (grad_clip_norm <= 0) bad("grad_clip_norm must be positive");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) bad("betas must lie in [0, 1)");
  if (validate_every <= 0) bad("validate_every must be positive");
  loss_weights.Validate();
  spec_augment.Validate();
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"peak_lr", peak_lr},
          {"weight_decay", weight_decay},
          {"warmup_steps", warmup_steps},
          {"total_steps", total_steps},
          {"min_lr", min_lr},
          {"batch_size", batch_size},
          {"w_ctc", loss_weights.w_ctc},
          {"w_spec", loss_weights.w_spec},
          {"seed", seed},
          {"freeze_speaker_encoder", freeze_speaker_encoder},
          {"grad_clip_norm", grad_clip_norm},
          {"beta1", beta1},
          {"beta2", beta2},
          {"adam_eps", adam_eps},
          {"spec_augment",
           {spec_augment.n_freq_masks, spec_augment.max_freq_width, spec_augment.n_time_masks,
            spec_augment.max_time_width, spec_augment.fill}},
          {"validate_every", validate_every},
          {"stop_at_zero_train_wer", stop_at_zero_train_wer}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json &j) {
  try {
    TrainConfig c;
    c.peak_lr = j.at("peak_lr");
    c.weight_decay = j.at("weight_decay");
    c.warmup_steps = j.at("warmup_steps");
    c.total_steps = j.at("total_steps");
    c.min_lr = j.at("min_lr");
    c.batch_size = j.at("batch_size");
    c.loss_weights = {j.at("w_ctc"), j.at("w_spec")};
    c.seed = j.at("seed");
    c.freeze_speaker_encoder = j.at("freeze_speaker_encoder");
    c.grad_clip_norm = j.at("grad_clip_norm");
    c.beta1 = j.at("beta1");
    c.beta2 = j.at("beta2");
    c.adam_eps = j.at("adam_eps");
    const auto &sa = j.at("spec_augment");
    c.spec_augment = {sa.at(0), sa.at(1), sa.at(2), sa.at(3), sa.at(4)};
    c.validate_every = j.at("validate_every");
    c.stop_at_zero_train_wer = j.at("stop_at_zero_train_wer");
    c.Validate();
    return c;
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorKind::kFormat, std::string("train config: ") + e.what());
  }
}

double LrAt(int64_t step, const TrainConfig &cfg) {
  if (step < 0 || step > cfg.total_steps)
    Fail(ErrorKind::kContract, "lr_at: step " + std::to_string(step) + " outside [0, " +
                                   std::to_string(cfg.total_steps) + "]");
  if (step <= cfg.warmup_steps) {
    if (cfg.warmup_steps == 0) return cfg.peak_lr;
    return cfg.peak_lr * (static_cast<double>(step) / cfg.warmup_steps);
  }
  double progress =
      static_cast<double>(step - cfg.warmup_steps) / (cfg.total_steps - cfg.warmup_steps);
  return cfg.min_lr + 0.5 * (cfg.peak_lr - cfg.min_lr) * (1.0 + std::cos(M_PI * progress));
}

AdamW::AdamW(ParameterStore *store, const TrainConfig &cfg)
    : store_(store),
      beta1_(cfg.beta1),
      beta2_(cfg.beta2),
      eps_(cfg.adam_eps),
      weight_decay_(cfg.weight_decay) {
  for (const auto &p : store_->all()) {
    m_.emplace_back(p.tensor.size(), 0.0);
    v_.emplace_back(p.tensor.size(), 0.0);
  }
}

void AdamW::Step(double lr) {
  auto &params = store_->all();
  for (const auto &p : params) {
    if (!p.trainable) continue;
    for (double g : p.tensor.grad())
      if (!std::isfinite(g))
        Fail(ErrorKind::kNonFinite, "non-finite gradient in parameter " + p.name);
  }
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (size_t i = 0; i < params.size(); ++i) {
    auto &p = params[i];
    if (!p.trainable) continue;
    auto w = p.tensor.mutable_values();
    auto g = p.tensor.grad();
    const bool has_grad = g.size() == w.size();
    auto &m = m_[i];
    auto &v = v_[i];
    const double decay = p.decay ? lr * weight_decay_ : 0.0;
    for (size_t k = 0; k < w.size(); ++k) {
      double gk = has_grad ? g[k] : 0.0;
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * gk;
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * gk * gk;
      double update = (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
      w[k] -= decay * w[k] + lr * update;
    }
  }
}

std::vector<NamedArray> AdamW::State() const {
  std::vector<NamedArray> out;
  const auto &params = store_->all();
  for (size_t i = 0; i < params.size(); ++i) {
    out.push_back({"adamw.m." + params[i].name, params[i].shape, m_[i]});
    out.push_back({"adamw.v." + params[i].name, params[i].shape, v_[i]});
  }
  return out;
}

void AdamW::LoadState(const std::vector<NamedArray> &state, int64_t step) {
  const auto &params = store_->all();
  if (state.size() != 2 * params.size())
    Fail(ErrorKind::kFormat, "optimizer state does not match the model");
  for (size_t i = 0; i < params.size(); ++i) {
    const auto &m = state[2 * i];
    const auto &v = state[2 * i + 1];
    if (m.name != "adamw.m." + params[i].name || v.name != "adamw.v." + params[i].name ||
        m.values.size() != m_[i].size() || v.values.size() != v_[i].size())
      Fail(ErrorKind::kFormat, "optimizer state mismatch at " + params[i].name);
    m_[i] = m.values;
    v_[i] = v.values;
  }
  step_ = step;
}

std::vector<int> BatchIndices(int64_t step, int num_examples, const TrainConfig &cfg) {
  if (num_examples <= 0) Fail(ErrorKind::kContract, "empty training set");
  std::vector<int> out;
  int64_t cached_epoch = -1;
  std::vector<int> perm;
  for (int j = 0; j < cfg.batch_size; ++j) {
    int64_t pos = step * cfg.batch_size + j;
    int64_t epoch = pos / num_examples;
    if (epoch != cached_epoch) {
      Rng rng(DeriveSeed(cfg.seed, 0x0e90c4, static_cast<uint64_t>(epoch)));
      perm = rng.Permutation(num_examples);
      cached_epoch = epoch;
    }
    out.push_back(perm[pos % num_examples]);
  }
  return out;
}

StepStats TrainStep(TsAsrModel *model, AdamW *optimizer,
                    const std::vector<PreparedExample> &data, const std::vector<int> &batch,
                    const TrainConfig &cfg, int64_t step, double lr) {
  auto &params = model->parameters().all();
  for (auto &p : params)
    if (p.trainable) p.tensor.ZeroGrad();
  StepStats stats;
  stats.step = step + 1;
  stats.lr = lr;
  const bool use_spec = cfg.loss_weights.w_spec > 0;
  std::vector<int> usable;
  for (int idx : batch) {
    const auto &ex = data[idx];
    int frames = Subsampler::OutputFrames(static_cast<int>(ex.mixture.rows()));
    if (frames < CtcMinFrames(ex.target_speaker.transcript.tokens)) {
      ++stats.skipped;
      continue;
    }
    usable.push_back(idx);
  }
  const double share = usable.empty() ? 0.0 : 1.0 / usable.size();
  for (size_t j = 0; j < batch.size(); ++j) {
    const auto &ex = data[batch[j]];
    if (std::find(usable.begin(), usable.end(), batch[j]) == usable.end()) continue;
    uint64_t ex_seed = DeriveSeed(cfg.seed, static_cast<uint64_t>(step), j);
    Rng rng(ex_seed);
    Spectrogram mix{ex.mixture};
    Matrix augmented = SpecAugment(mix, cfg.spec_augment, ex_seed).values;
    // One enrollment utterance during training.
    Tensor emb = model->EncodeSpeaker({ex.target_speaker.aux.front()});
    ModelOutput out = model->Forward(augmented, emb, {true, &rng}, use_spec);
    Tensor ctc = CtcLoss(out.log_probs, ex.target_speaker.transcript.tokens);
    Tensor spec = use_spec ? SpectrogramLoss(out.reconstruction, ex.target) : Tensor::Scalar(0.0);
    Tensor loss = Scale(CombinedLoss(ctc, spec, cfg.loss_weights), share);
    loss.Backward();
    stats.loss += loss.item();
    stats.loss_ctc += ctc.item() * share;
    stats.loss_spec += spec.item() * share;
    ++stats.used;
  }
  double sq = 0.0;
  for (const auto &p : params)
    if (p.trainable)
      for (double g : p.tensor.grad()) sq += g * g;
  stats.grad_norm = std::sqrt(sq);
  if (stats.grad_norm > cfg.grad_clip_norm) {
    double factor = cfg.grad_clip_norm / stats.grad_norm;
    for (auto &p : params)
      if (p.trainable)
        for (double &g : p.tensor.mutable_grad()) g *= factor;
  }
  optimizer->Step(lr);
  return stats;
}

Checkpoint MakeTrainingCheckpoint(const TsAsrModel &model, const AdamW &optimizer,
                                  const TrainConfig &cfg, const nlohmann::json &metadata) {
  Checkpoint ckpt = SnapshotModel(model);
  ckpt.config["train"] = cfg.ToJson();
  ckpt.step = optimizer.step();
  ckpt.optimizer = optimizer.State();
  ckpt.metadata = metadata;
  return ckpt;
}

TrainResult Train(TsAsrModel *model, const std::vector<PreparedExample> &train,
                  const TrainConfig &cfg, const TrainOptions &options) {
  cfg.Validate();
  if (train.empty()) Fail(ErrorKind::kContract, "empty training set");
  model->parameters().SetTrainable("speaker_encoder.", !cfg.freeze_speaker_encoder &&
                                                           !model->config().freeze_speaker_encoder);
  AdamW optimizer(&model->parameters(), cfg);
  TrainResult result;
  nlohmann::json meta = nlohmann::json::object();
  if (options.resume) {
    RestoreParameters(*options.resume, model);
    optimizer.LoadState(options.resume->optimizer, options.resume->step);
    meta = options.resume->metadata;
    if (meta.contains("best_valid_wer")) result.best_valid_wer = meta["best_valid_wer"];
  }
  if (!options.checkpoint_dir.empty()) std::filesystem::create_directories(options.checkpoint_dir);
  const Recognizer recognize = ModelRecognizer(*model);
  int64_t updates = 0;
  for (int64_t step = optimizer.step(); step < cfg.total_steps; ++step) {
    if (options.max_updates > 0 && updates >= options.max_updates) break;
    StepStats stats = TrainStep(model, &optimizer, train, BatchIndices(step, train.size(), cfg),
                                cfg, step, LrAt(step + 1, cfg));
    ++updates;
    result.skipped += stats.skipped;
    result.history.push_back(stats);
    if (options.metrics)
      *options.metrics << nlohmann::json{{"step", stats.step},       {"lr", stats.lr},
                                         {"loss", stats.loss},       {"loss_ctc", stats.loss_ctc},
                                         {"loss_spec", stats.loss_spec},
                                         {"grad_norm", stats.grad_norm},
                                         {"skipped", stats.skipped}}
                                .dump()
                       << '\n';
    bool last = stats.step == cfg.total_steps;
    if (stats.step % cfg.validate_every == 0 || last) {
      nlohmann::json event = {{"step", stats.step}};
      if (cfg.stop_at_zero_train_wer || last) {
        result.final_train_wer = TsEval(recognize, train).total.wer_percent();
        event["train_ts_wer"] = result.final_train_wer;
      }
      if (options.validation) {
        double wer = TsEval(recognize, *options.validation).total.wer_percent();
        event["ts_wer"] = wer;
        if (result.best_valid_wer < 0 || wer < result.best_valid_wer) {
          result.best_valid_wer = wer;
          meta["best_valid_wer"] = wer;
          if (!options.checkpoint_dir.empty())
            SaveCheckpoint(MakeTrainingCheckpoint(*model, optimizer, cfg, meta),
                           options.checkpoint_dir + "/best.ckpt");
        }
      }
      if (options.metrics) *options.metrics << event.dump() << '\n';
      if (cfg.stop_at_zero_train_wer && result.final_train_wer == 0.0) {
        result.steps = stats.step;
        break;
      }
    }
    result.steps = stats.step;
  }
  meta["skipped"] = result.skipped;
  if (!options.checkpoint_dir.empty())
    SaveCheckpoint(MakeTrainingCheckpoint(*model, optimizer, cfg, meta),
                   options.checkpoint_dir + "/last.ckpt");
  return result;
}

}  // namespace tsasr
