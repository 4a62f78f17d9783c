// decode/evaluate.cc
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

#include "decode/evaluate.h"

#include <iomanip>

#include "base/tsasr-error.h"

namespace tsasr {

PreparedExample PrepareExample(const MixtureExample &ex) {
  PreparedExample p;
  p.example_id = ex.example_id;
  p.mixture = ComputeLogMel(ex.mixture).values;
  if (!ex.target_in_mixture.samples.empty()) {
    Waveform target = ex.target_in_mixture;
    target.samples.resize(ex.mixture.samples.size(), 0.0);
    p.target = ComputeLogMel(target).values;
  }
  p.target_speaker.speaker_id = ex.target_speaker_id;
  p.target_speaker.transcript = ex.target_transcript;
  p.target_speaker.aux.push_back(ComputeLogMel(ex.auxiliary).values);
  if (!ex.auxiliary_extra.samples.empty())
    p.target_speaker.aux.push_back(ComputeLogMel(ex.auxiliary_extra).values);
  for (const auto &in : ex.interferers)
    p.interferers.push_back({in.speaker_id, in.transcript, {ComputeLogMel(in.auxiliary).values}});
  return p;
}

std::vector<PreparedExample> PrepareExamples(const std::vector<MixtureExample> &examples) {
  std::vector<PreparedExample> out;
  out.reserve(examples.size());
  for (const auto &ex : examples) out.push_back(PrepareExample(ex));
  return out;
}

void AuxPolicy::Validate() const {
  if (count < 1 || count > 2)
    Fail(ErrorKind::kConfig, "aux count must be 1 or 2, got " + std::to_string(count));
  if (seconds < 0) Fail(ErrorKind::kConfig, "aux seconds must be nonnegative");
}

std::vector<Matrix> SelectAux(const std::vector<Matrix> &available, const AuxPolicy &policy) {
  policy.Validate();
  if (static_cast<int>(available.size()) < policy.count)
    Fail(ErrorKind::kProtocol, "requested " + std::to_string(policy.count) +
                                   " auxiliary utterances, only " +
                                   std::to_string(available.size()) + " available");
  std::vector<Matrix> out(available.begin(), available.begin() + policy.count);
  if (policy.seconds > 0) {
    int budget = std::max(1, static_cast<int>(std::lround(policy.seconds / 0.010)));
    std::vector<Matrix> capped;
    for (const auto &m : out) {
      if (budget <= 0) break;
      int rows = std::min<int>(budget, static_cast<int>(m.rows()));
      capped.push_back(m.topRows(rows));
      budget -= rows;
    }
    out = std::move(capped);
  }
  return out;
}

Recognizer ModelRecognizer(const TsAsrModel &model) {
  return [&model](const Matrix &mixture, const std::vector<Matrix> &aux) {
    return GreedyDecode(model.Forward(mixture, model.EncodeSpeaker(aux), {}).log_probs);
  };
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto &r : per_example)
    rows.push_back({{"id", r.example_id},
                    {"target_speaker", r.target_speaker},
                    {"reference", r.reference.ToText()},
                    {"hypothesis", r.hypothesis.ToText()},
                    {"wer", r.wer.wer_percent()},
                    {"S", r.wer.substitutions},
                    {"I", r.wer.insertions},
                    {"D", r.wer.deletions},
                    {"n_words", r.wer.n_ref_words}});
  return {{"wer", total.n_ref_words > 0 ? total.wer_percent() : 0.0},
          {"S", total.substitutions},
          {"I", total.insertions},
          {"D", total.deletions},
          {"n_words", total.n_ref_words},
          {"per_example", rows}};
}

EvalReport TsEval(const Recognizer &recognizer, const std::vector<PreparedExample> &examples,
                  const EvalOptions &options) {
  options.aux.Validate();
  EvalReport report;
  auto run = [&](const PreparedExample &ex, const PreparedSpeaker &spk, const AuxPolicy &aux) {
    Hypothesis hyp = recognizer(ex.mixture, SelectAux(spk.aux, aux));
    ExampleResult r{ex.example_id, spk.speaker_id, spk.transcript, hyp.tokens,
                    ComputeWer(spk.transcript, hyp.tokens)};
    report.total += r.wer;
    report.per_example.push_back(std::move(r));
  };
  for (const auto &ex : examples) {
    run(ex, ex.target_speaker, options.aux);
    if (options.all_targets) {
      AuxPolicy single = options.aux;
      single.count = 1;
      for (const auto &spk : ex.interferers) run(ex, spk, single);
    }
  }
  return report;
}

std::vector<SweepPoint> SnrSweep(const Recognizer &recognizer, const CorpusConfig &config,
                                 uint64_t seed, const std::vector<double> &snrs_db,
                                 const EvalOptions &options) {
  std::vector<SweepPoint> points;
  for (double snr : snrs_db) {
    CorpusConfig c = config;
    c.fixed_snr_db = snr;
    Corpus corpus = BuildCorpus(c, seed);
    points.push_back({snr, TsEval(recognizer, PrepareExamples(corpus.examples), options).total});
  }
  return points;
}

void WriteSweepCsv(std::ostream &os, const std::vector<SweepPoint> &points) {
  os << "snr_db,ts_wer,errors,n_words\n";
  for (const auto &p : points)
    os << std::setprecision(6) << p.snr_db << ',' << p.report.wer_percent() << ','
       << p.report.errors() << ',' << p.report.n_ref_words << '\n';
}

}  // namespace tsasr
