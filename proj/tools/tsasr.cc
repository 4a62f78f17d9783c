// tools/tsasr.cc
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

// tsasr: corpus synthesis, training, evaluation, transcription, alignment
// export, SNR sweeps and parameter counting.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "base/tsasr-error.h"
#include "decode/evaluate.h"
#include "json.hpp"
#include "net/checkpoint.h"
#include "signal/corpus.h"
#include "train/trainer.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tsasr {
namespace {

struct CorpusFlags {
  CorpusConfig c;
  std::string protocol = "wsj0";
  double fixed_snr = 0.0;
  bool no_volume = false;

  void Add(CLI::App *app) {
    app->add_option("--num-speakers", c.num_speakers, "Synthetic voices")->capture_default_str();
    app->add_option("--utts-per-speaker", c.utts_per_speaker, "Utterances per voice")
        ->capture_default_str();
    app->add_option("--num-examples", c.num_examples, "Mixtures to build")->capture_default_str();
    app->add_option("--speakers-per-mix", c.speakers_per_mix, "2 or 3")->capture_default_str();
    app->add_option("--protocol", protocol, "wsj0 or libri")
        ->check(CLI::IsMember({"wsj0", "libri"}))
        ->capture_default_str();
    app->add_option("--snr-min", c.snr_min_db, "Lowest sampled SNR (dB)")->capture_default_str();
    app->add_option("--snr-max", c.snr_max_db, "Highest sampled SNR (dB)")->capture_default_str();
    app->add_option("--fixed-snr", fixed_snr, "Use this SNR (dB) for every mixture");
    app->add_option("--speed-perturb-prob", c.speed_perturb_prob, "Chance of speed perturbation")
        ->capture_default_str();
    app->add_flag("--no-volume-perturb", no_volume, "Disable volume perturbation");
    app->add_option("--min-words", c.min_words, "Fewest words per utterance")
        ->capture_default_str();
    app->add_option("--max-words", c.max_words, "Most words per utterance")->capture_default_str();
    app->add_option("--min-letters", c.min_word_letters, "Fewest letters per word")
        ->capture_default_str();
    app->add_option("--max-letters", c.max_word_letters, "Most letters per word")
        ->capture_default_str();
    app->add_option("--speaker-seed", c.speaker_seed, "Seed for the voices")->capture_default_str();
    app->add_flag("--all-targets", c.all_targets, "Emit each mixture once per speaker as target");
  }

  CorpusConfig Get(const CLI::App &app) const {
    CorpusConfig out = c;
    out.protocol = ParseMixProtocol(protocol);
    if (app.count("--fixed-snr")) out.fixed_snr_db = fixed_snr;
    out.volume_perturb = !no_volume;
    out.Validate();
    return out;
  }
};

struct ModelFlags {
  std::string preset = "desk";
  int layers = 0;
  int d_model = 0;

  void Add(CLI::App *app) {
    app->add_option("--model", preset, "Model size: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}))
        ->capture_default_str();
    app->add_option("--layers", layers, "Conformer blocks per stack (overrides the preset)");
    app->add_option("--d-model", d_model, "Model width (overrides the preset)");
  }

  ModelConfig Get() const {
    ModelConfig m = preset == "paper" ? ModelConfig::Paper() : ModelConfig::Desk();
    for (ConformerConfig *s : {&m.masknet, &m.asr}) {
      if (layers > 0) s->n_layers = layers;
      if (d_model > 0) {
        s->d_ff = s->d_ff / s->d_model * d_model;
        s->d_model = d_model;
      }
    }
    m.Validate();
    return m;
  }
};

std::unique_ptr<TsAsrModel> LoadModel(const std::string &path) {
  Checkpoint ckpt = LoadCheckpoint(path);
  auto model = std::make_unique<TsAsrModel>(CheckpointModelConfig(ckpt), 0);
  RestoreParameters(ckpt, model.get());
  return model;
}

Matrix WavFeatures(const std::string &path) { return ComputeLogMel(ReadWav(path)).values; }

std::ofstream OpenOut(const std::string &path) {
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream os(path);
  if (!os) Fail(ErrorKind::kIo, "cannot write " + path);
  return os;
}

std::string WerSummary(const WerReport &r) {
  std::ostringstream os;
  os << "TS-WER " << r.wer_percent() << "% (" << r.substitutions << " sub, " << r.insertions
     << " ins, " << r.deletions << " del over " << r.n_ref_words << " words)";
  return os.str();
}

json WerJson(const WerReport &r) {
  return {{"wer", r.wer_percent()},
          {"substitutions", r.substitutions},
          {"insertions", r.insertions},
          {"deletions", r.deletions},
          {"n_ref_words", r.n_ref_words}};
}

// Reads "key = value" lines ('#' comments, blank lines and [section]
// headers ignored) and turns them into "--key=value" arguments.
std::vector<std::string> ConfigArgs(const std::string &path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorKind::kIo, "cannot read config file " + path);
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      Fail(ErrorKind::kConfig, path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    args.push_back("--" + key + "=" + trim(line.substr(eq + 1)));
  }
  return args;
}

// Config values go right after the subcommand name so that flags given on
// the command line, which come later, take precedence.
std::vector<std::string> ExpandConfig(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (config.empty() || args.empty()) return args;
  std::vector<std::string> extra = ConfigArgs(config);
  args.insert(args.begin() + 1, extra.begin(), extra.end());
  return args;
}

int Run(int argc, char **argv) {
  CLI::App app{"Target-speaker speech recognition on synthetic overlapped speech.", "tsasr"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  bool as_json = false;
  std::string config_path;
  auto common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path, "Key-value config file (flags override it)");
    sub->add_flag("--json", as_json, "Print the summary as JSON");
  };

  // synth
  CLI::App *synth = app.add_subcommand("synth", "Build a synthetic mixture corpus");
  CorpusFlags synth_corpus;
  uint64_t seed = 1;
  std::string out;
  common(synth);
  synth_corpus.Add(synth);
  synth->add_option("--seed", seed, "Corpus seed")->capture_default_str();
  synth->add_option("--out", out, "Output directory")->required();

  // train
  CLI::App *train = app.add_subcommand("train", "Train a model");
  ModelFlags model_flags;
  TrainConfig tc;
  std::string manifest, valid_manifest, resume;
  bool no_spec_augment = false;
  common(train);
  model_flags.Add(train);
  train->add_option("--manifest", manifest, "Training manifest")->required();
  train->add_option("--valid-manifest", valid_manifest, "Validation manifest");
  train->add_option("--out", out, "Directory for checkpoints and metrics.jsonl")->required();
  train->add_option("--seed", seed, "Seed for initialization and batching")->capture_default_str();
  train->add_option("--steps", tc.total_steps, "Total updates")->capture_default_str();
  train->add_option("--warmup", tc.warmup_steps, "Warmup updates")->capture_default_str();
  train->add_option("--lr", tc.peak_lr, "Peak learning rate")->capture_default_str();
  train->add_option("--min-lr", tc.min_lr, "Final learning rate")->capture_default_str();
  train->add_option("--batch-size", tc.batch_size, "Examples per update")->capture_default_str();
  train->add_option("--weight-decay", tc.weight_decay, "Decoupled weight decay")
      ->capture_default_str();
  train->add_option("--w-ctc", tc.loss_weights.w_ctc, "CTC loss weight")->capture_default_str();
  train->add_option("--w-spec", tc.loss_weights.w_spec, "Spectrogram loss weight")
      ->capture_default_str();
  train->add_option("--grad-clip", tc.grad_clip_norm, "Global gradient norm limit")
      ->capture_default_str();
  train->add_option("--validate-every", tc.validate_every, "Updates between validations")
      ->capture_default_str();
  train->add_flag("--freeze-speaker-encoder", tc.freeze_speaker_encoder,
                  "Keep the speaker encoder fixed");
  train->add_flag("--no-spec-augment", no_spec_augment, "Disable SpecAugment");
  train->add_flag("--stop-at-zero-wer", tc.stop_at_zero_train_wer,
                  "Stop once training TS-WER reaches 0%");
  train->add_option("--resume", resume, "Continue from this checkpoint");

  // eval
  CLI::App *eval = app.add_subcommand("eval", "Score a model on a manifest");
  std::string checkpoint, target_speaker;
  AuxPolicy aux_policy;
  bool all_targets = false;
  common(eval);
  eval->add_option("--manifest", manifest, "Evaluation manifest")->required();
  eval->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  eval->add_option("--aux-count", aux_policy.count, "Enrollment utterances (1 or 2)")
      ->capture_default_str();
  eval->add_option("--aux-seconds", aux_policy.seconds, "Cap on enrollment audio (0 = none)")
      ->capture_default_str();
  eval->add_option("--target-speaker", target_speaker, "Only mixtures with this target");
  eval->add_flag("--all-targets", all_targets, "Also recognize every interferer as target");
  eval->add_option("--out", out, "JSON report path");

  // transcribe / align
  std::string mixture_path;
  std::vector<std::string> aux_paths;
  CLI::App *transcribe = app.add_subcommand("transcribe", "Transcribe one target speaker");
  CLI::App *align = app.add_subcommand("align", "Export per-frame posteriors as CSV");
  for (CLI::App *sub : {transcribe, align}) {
    common(sub);
    sub->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
    sub->add_option("--mixture", mixture_path, "Mixture WAV")->required();
    sub->add_option("--aux", aux_paths, "Enrollment WAV (repeat for more)")
        ->required()
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  }
  transcribe->add_option("--out", out, "Write the transcript to this file");
  align->add_option("--out", out, "CSV path")->required();

  // sweep-snr
  CLI::App *sweep = app.add_subcommand("sweep-snr", "TS-WER as a function of SNR");
  CorpusFlags sweep_corpus;
  std::vector<double> snrs = {-5, 0, 5, 10};
  common(sweep);
  sweep_corpus.Add(sweep);
  sweep->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  sweep->add_option("--seed", seed, "Corpus seed")->capture_default_str();
  sweep->add_option("--snr-list", snrs, "Comma-separated SNRs (dB)")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->capture_default_str();
  sweep->add_option("--aux-count", aux_policy.count, "Enrollment utterances (1 or 2)")
      ->capture_default_str();
  sweep->add_option("--out", out, "CSV path");

  // count-params
  CLI::App *count = app.add_subcommand("count-params", "Trainable parameters per module");
  ModelFlags count_flags;
  common(count);
  count_flags.Add(count);
  count->add_option("--checkpoint", checkpoint, "Count the model stored here instead");

  std::vector<std::string> args = ExpandConfig(argc, argv);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "tsasr: error: " << msg << '\n';
    return e.get_exit_code();
  }

  if (synth->parsed()) {
    CorpusConfig cc = synth_corpus.Get(*synth);
    Corpus corpus = BuildCorpus(cc, seed);
    WriteCorpus(corpus, out);
    if (as_json)
      std::cout << json{{"examples", corpus.examples.size()},
                        {"speakers", corpus.speakers.size()},
                        {"utterances", corpus.utterances.size()},
                        {"manifest", (fs::path(out) / "manifest.jsonl").string()}}
                       .dump()
                << '\n';
    else
      std::cout << "wrote " << corpus.examples.size() << " mixtures from "
                << corpus.speakers.size() << " speakers to " << out << '\n';
  } else if (train->parsed()) {
    if (no_spec_augment) tc.spec_augment = SpecAugmentPolicy::None();
    tc.seed = seed;
    if (tc.warmup_steps >= tc.total_steps) tc.warmup_steps = tc.total_steps / 10;
    tc.Validate();
    auto data = PrepareExamples(LoadManifest(manifest));
    std::vector<PreparedExample> valid;
    if (!valid_manifest.empty()) valid = PrepareExamples(LoadManifest(valid_manifest));
    std::optional<Checkpoint> ckpt;
    if (!resume.empty()) ckpt = LoadCheckpoint(resume);
    ModelConfig mc = ckpt ? CheckpointModelConfig(*ckpt) : model_flags.Get();
    TsAsrModel model(mc, seed);
    fs::create_directories(out);
    std::ofstream metrics(fs::path(out) / "metrics.jsonl",
                          ckpt ? std::ios::app : std::ios::trunc);
    if (!metrics) Fail(ErrorKind::kIo, "cannot write metrics in " + out);
    TrainOptions opt;
    opt.metrics = &metrics;
    opt.checkpoint_dir = out;
    opt.validation = valid.empty() ? nullptr : &valid;
    opt.resume = ckpt ? &*ckpt : nullptr;
    TrainResult r = Train(&model, data, tc, opt);
    json summary = {{"steps", r.steps},
                    {"skipped", r.skipped},
                    {"final_train_ts_wer", r.final_train_wer},
                    {"best_valid_ts_wer", r.best_valid_wer},
                    {"checkpoint", (fs::path(out) / "last.ckpt").string()}};
    if (as_json) {
      std::cout << summary.dump() << '\n';
    } else {
      std::cout << "trained " << r.steps << " updates";
      if (r.final_train_wer >= 0) std::cout << ", training TS-WER " << r.final_train_wer << "%";
      if (r.best_valid_wer >= 0) std::cout << ", best validation TS-WER " << r.best_valid_wer << "%";
      std::cout << "; checkpoints in " << out << '\n';
    }
  } else if (eval->parsed()) {
    auto model = LoadModel(checkpoint);
    auto raw = LoadManifest(manifest);
    if (!target_speaker.empty())
      std::erase_if(raw, [&](const MixtureExample &e) { return e.target_speaker_id != target_speaker; });
    if (raw.empty()) Fail(ErrorKind::kConfig, "no mixtures to evaluate");
    EvalOptions eo;
    eo.aux = aux_policy;
    eo.all_targets = all_targets;
    EvalReport report = TsEval(ModelRecognizer(*model), PrepareExamples(raw), eo);
    json j = report.ToJson();
    if (!out.empty()) OpenOut(out) << j.dump(2) << '\n';
    if (as_json)
      std::cout << WerJson(report.total).dump() << '\n';
    else
      std::cout << WerSummary(report.total) << " on " << report.per_example.size()
                << " targets\n";
  } else if (transcribe->parsed() || align->parsed()) {
    auto model = LoadModel(checkpoint);
    std::vector<Matrix> aux;
    for (const auto &p : aux_paths) aux.push_back(WavFeatures(p));
    Hypothesis hyp = ModelRecognizer(*model)(WavFeatures(mixture_path), aux);
    std::string text = hyp.tokens.ToText();
    if (align->parsed()) {
      std::ofstream os = OpenOut(out);
      WriteAlignmentCsv(os, hyp);
      if (as_json)
        std::cout << json{{"transcript", text}, {"frames", hyp.posteriors.rows()}}.dump()
                  << '\n';
      else
        std::cout << hyp.posteriors.rows() << " frames written to " << out << '\n';
    } else {
      if (!out.empty()) OpenOut(out) << text << '\n';
      if (as_json)
        std::cout << json{{"transcript", text}}.dump() << '\n';
      else
        std::cout << text << '\n';
    }
  } else if (sweep->parsed()) {
    auto model = LoadModel(checkpoint);
    EvalOptions eo;
    eo.aux = aux_policy;
    auto points =
        SnrSweep(ModelRecognizer(*model), sweep_corpus.Get(*sweep), seed, snrs, eo);
    if (!out.empty()) {
      std::ofstream os = OpenOut(out);
      WriteSweepCsv(os, points);
    }
    if (as_json) {
      json j = json::array();
      for (const auto &p : points) {
        json row = WerJson(p.report);
        row["snr_db"] = p.snr_db;
        j.push_back(row);
      }
      std::cout << j.dump() << '\n';
    } else {
      for (const auto &p : points)
        std::cout << p.snr_db << " dB: " << WerSummary(p.report) << '\n';
    }
  } else if (count->parsed()) {
    ModelConfig mc = count_flags.Get();
    if (!checkpoint.empty()) mc = CheckpointModelConfig(LoadCheckpoint(checkpoint));
    auto counts = CountParameters(mc);
    if (as_json) {
      std::cout << json(counts).dump() << '\n';
    } else {
      for (const auto &[name, n] : counts)
        if (name != "total") std::cout << name << ": " << n << '\n';
      std::cout << "total: " << counts.at("total") << '\n';
    }
  }
  return 0;
}

}  // namespace
}  // namespace tsasr

int main(int argc, char **argv) {
  try {
    return tsasr::Run(argc, argv);
  } catch (const tsasr::TsasrError &e) {
    std::cerr << "tsasr: error (" << tsasr::ErrorKindName(e.kind()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "tsasr: error: " << e.what() << '\n';
    return 1;
  }
}
