// decode/evaluate.h
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

#ifndef TSASR_DECODE_EVALUATE_H_
#define TSASR_DECODE_EVALUATE_H_

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "decode/decode.h"
#include "feat/features.h"
#include "json.hpp"
#include "net/model.h"
#include "signal/corpus.h"

namespace tsasr {

struct PreparedSpeaker {
  std::string speaker_id;
  Transcript transcript;
  std::vector<Matrix> aux;  // enrollment log-Mels, in manifest order
};

// Everything the model consumes for one mixture, as normalized log-Mels.
struct PreparedExample {
  std::string example_id;
  Matrix mixture;
  Matrix target;  // clean target as placed in the mixture; S_t
  PreparedSpeaker target_speaker;
  std::vector<PreparedSpeaker> interferers;
};

PreparedExample PrepareExample(const MixtureExample &ex);
std::vector<PreparedExample> PrepareExamples(const std::vector<MixtureExample> &examples);

// How many enrollment utterances to concatenate (1 or 2) and an optional cap
// on their total duration (0 = no cap), applied by truncating frames.
struct AuxPolicy {
  int count = 1;
  double seconds = 0.0;

  void Validate() const;
};

// Throws kProtocol when fewer than `count` utterances are available.
std::vector<Matrix> SelectAux(const std::vector<Matrix> &available, const AuxPolicy &policy);

using Recognizer = std::function<Hypothesis(const Matrix &mixture, const std::vector<Matrix> &aux)>;

Recognizer ModelRecognizer(const TsAsrModel &model);

struct EvalOptions {
  AuxPolicy aux;
  // Also transcribe every interferer as the target, one at a time. An
  // interferer has a single enrollment utterance, so at most one is used.
  bool all_targets = false;
};

struct ExampleResult {
  std::string example_id;
  std::string target_speaker;
  Transcript reference;
  Transcript hypothesis;
  WerReport wer;
};

// Corpus TS-WER pools errors over all (mixture, target) pairs.
struct EvalReport {
  WerReport total;
  std::vector<ExampleResult> per_example;

  nlohmann::json ToJson() const;
};

EvalReport TsEval(const Recognizer &recognizer, const std::vector<PreparedExample> &examples,
                  const EvalOptions &options = {});

struct SweepPoint {
  double snr_db = 0.0;
  WerReport report;
};

// Rebuilds the corpus once per SNR with the SNR fixed; all other draws are
// unchanged, so the mixtures differ only in SNR.
std::vector<SweepPoint> SnrSweep(const Recognizer &recognizer, const CorpusConfig &config,
                                 uint64_t seed, const std::vector<double> &snrs_db,
                                 const EvalOptions &options = {});
void WriteSweepCsv(std::ostream &os, const std::vector<SweepPoint> &points);

}  // namespace tsasr

#endif  // TSASR_DECODE_EVALUATE_H_
