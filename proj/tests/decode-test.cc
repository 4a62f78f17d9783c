// tests/decode-test.cc
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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "base/random.h"
#include "base/tsasr-error.h"
#include "decode/decode.h"
#include "decode/evaluate.h"

namespace tsasr {
namespace {

// Log-probability grid whose per-frame argmax follows `path`.
Tensor PathGrid(const std::vector<int> &path, int vocab = 17) {
  std::vector<double> v;
  for (int k : path) {
    std::vector<double> row(vocab, std::log(0.2 / (vocab - 1)));
    row[k] = std::log(0.8);
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor({static_cast<int>(path.size()), vocab}, v);
}

TEST(CollapseTest, Rules) {
  EXPECT_EQ(CollapsePath({1, 1, 0, 2}), (std::vector<int>{1, 2}));
  EXPECT_TRUE(CollapsePath({0, 0, 0}).empty());
  EXPECT_EQ(CollapsePath({1, 0, 1}), (std::vector<int>{1, 1}));
}

// A second collapse is a no-op exactly when the first output has no
// adjacent repeats; a blank-separated repeat such as [a, _, a] -> [a, a] is
// merged again.
TEST(CollapseTest, IdempotentWithoutAdjacentRepeats) {
  Rng rng(1);
  int repeats = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> path(rng.UniformInt(0, 12));
    for (auto &k : path) k = rng.UniformInt(0, 3);
    auto once = CollapsePath(path);
    bool adjacent = std::adjacent_find(once.begin(), once.end()) != once.end();
    repeats += adjacent;
    if (adjacent) {
      EXPECT_LT(CollapsePath(once).size(), once.size());
    } else {
      EXPECT_EQ(CollapsePath(once), once);
    }
  }
  EXPECT_GT(repeats, 0);
  EXPECT_EQ(CollapsePath(CollapsePath({1, 0, 1})), (std::vector<int>{1}));
}

TEST(GreedyDecodeTest, TokensAndAlignment) {
  Hypothesis h = GreedyDecode(PathGrid({1, 1, 0, 2, 16, 16, 3, 0}));
  EXPECT_EQ(h.tokens.tokens, (std::vector<int>{1, 2, 16, 3}));
  EXPECT_EQ(h.frame_alignment, (std::vector<int>{0, 3, 4, 6}));
  EXPECT_EQ(h.tokens.ToText(), "ab c");
  ASSERT_EQ(h.posteriors.rows(), 8);
  EXPECT_NEAR(h.posteriors.row(2).sum(), 1.0, 1e-12);
  EXPECT_TRUE(GreedyDecode(PathGrid({0, 0})).tokens.empty());
}

std::vector<std::string> Split(const std::string &s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

TEST(WerTest, Examples) {
  EXPECT_EQ(ComputeWer(Split("a b c"), Split("a b c")).wer_percent(), 0.0);
  WerReport sub = ComputeWer(Split("a b c"), Split("a x c"));
  EXPECT_EQ(sub.substitutions, 1);
  EXPECT_NEAR(sub.wer_percent(), 100.0 / 3.0, 1e-12);
  WerReport del = ComputeWer(Split("a b"), {});
  EXPECT_EQ(del.deletions, 2);
  EXPECT_EQ(del.wer_percent(), 100.0);
  WerReport ins = ComputeWer(Split("a"), Split("a b c"));
  EXPECT_EQ(ins.insertions, 2);
  EXPECT_EQ(ins.wer_percent(), 200.0);
}

TEST(WerTest, TiesPreferSubstitution) {
  WerReport r = ComputeWer(Split("a b"), Split("b c"));
  EXPECT_EQ(r.errors(), 2);
  EXPECT_EQ(r.substitutions, 2);
  EXPECT_EQ(r.insertions + r.deletions, 0);
}

TEST(WerTest, EmptyReferenceIsUndefined) {
  try {
    ComputeWer(std::vector<std::string>{}, Split("a"));
    FAIL();
  } catch (const TsasrError &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUndefinedWer);
  }
}

// Minimum over every edit path, enumerated by plain recursion.
int EnumerateEditPaths(const std::vector<std::string> &r, size_t i,
                       const std::vector<std::string> &h, size_t j) {
  if (i == r.size()) return static_cast<int>(h.size() - j);
  if (j == h.size()) return static_cast<int>(r.size() - i);
  return std::min({EnumerateEditPaths(r, i + 1, h, j + 1) + (r[i] != h[j]),
                   EnumerateEditPaths(r, i + 1, h, j) + 1, EnumerateEditPaths(r, i, h, j + 1) + 1});
}

TEST(WerTest, MatchesExhaustiveEnumeration) {
  Rng rng(2);
  const std::vector<std::string> lex{"ab", "cd", "e", "fg"};
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<std::string> ref(rng.UniformInt(1, 6)), hyp(rng.UniformInt(0, 6));
    for (auto &w : ref) w = lex[rng.UniformInt(0, 3)];
    for (auto &w : hyp) w = lex[rng.UniformInt(0, 3)];
    WerReport rep = ComputeWer(ref, hyp);
    EXPECT_EQ(rep.errors(), EnumerateEditPaths(ref, 0, hyp, 0));
    EXPECT_EQ(rep.n_ref_words - rep.deletions + rep.insertions, static_cast<int>(hyp.size()));
    // Error counts are symmetric even though the normalization is not.
    EXPECT_EQ(ComputeWer(hyp.empty() ? ref : hyp, hyp.empty() ? hyp : ref).errors(), rep.errors());
  }
}

TEST(AlignmentTest, CsvIsWellFormed) {
  Hypothesis h = GreedyDecode(PathGrid({0, 1, 0, 0, 16, 2}));
  std::ostringstream os;
  WriteAlignmentCsv(os, h);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "frame,time_sec,token,probability");
  int rows = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3);
    double p = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, 1.0);
    ++rows;
  }
  EXPECT_EQ(rows, 6);
  EXPECT_NE(os.str().find("1,0.040000,a,0.800000"), std::string::npos);
}

CorpusConfig SmallCorpus() {
  CorpusConfig c;
  c.num_examples = 6;
  c.utts_per_speaker = 4;
  return c;
}

TEST(TsEvalTest, OracleRecognizerScoresZero) {
  auto examples = PrepareExamples(BuildCorpus(SmallCorpus(), 3).examples);
  // The oracle looks up the transcript by the mixture it was handed.
  Recognizer oracle = [&](const Matrix &mix, const std::vector<Matrix> &) {
    for (const auto &ex : examples)
      if (ex.mixture.rows() == mix.rows() && ex.mixture == mix)
        return Hypothesis{ex.target_speaker.transcript, {}, {}};
    return Hypothesis{};
  };
  EvalReport rep = TsEval(oracle, examples);
  EXPECT_EQ(rep.total.errors(), 0);
  EXPECT_EQ(rep.per_example.size(), examples.size());
  nlohmann::json j = rep.ToJson();
  for (const char *key : {"wer", "S", "I", "D", "n_words", "per_example"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(TsEvalTest, SingleExampleEqualsItsWer) {
  auto examples = PrepareExamples(BuildCorpus(SmallCorpus(), 4).examples);
  examples.resize(1);
  Recognizer fixed = [](const Matrix &, const std::vector<Matrix> &) {
    return Hypothesis{Transcript::FromText("ab"), {}, {}};
  };
  EvalReport rep = TsEval(fixed, examples);
  EXPECT_EQ(rep.total.wer_percent(), rep.per_example[0].wer.wer_percent());
  EXPECT_EQ(rep.total.wer_percent(),
            ComputeWer(examples[0].target_speaker.transcript, Transcript::FromText("ab"))
                .wer_percent());
}

TEST(TsEvalTest, AuxPolicyOnlyChangesEnrollmentInput) {
  auto examples = PrepareExamples(BuildCorpus(SmallCorpus(), 5).examples);
  std::vector<std::vector<int>> seen;
  std::vector<Matrix> mixtures;
  Recognizer probe = [&](const Matrix &mix, const std::vector<Matrix> &aux) {
    std::vector<int> rows;
    for (const auto &a : aux) rows.push_back(static_cast<int>(a.rows()));
    seen.push_back(rows);
    mixtures.push_back(mix);
    return Hypothesis{};
  };
  TsEval(probe, examples, {{1, 0.0}});
  TsEval(probe, examples, {{2, 0.0}});
  const size_t n = examples.size();
  for (size_t i = 0; i < n; ++i) {
    const auto &aux = examples[i].target_speaker.aux;
    EXPECT_EQ(seen[i], (std::vector<int>{static_cast<int>(aux[0].rows())}));
    EXPECT_EQ(seen[n + i],
              (std::vector<int>{static_cast<int>(aux[0].rows()), static_cast<int>(aux[1].rows())}));
    EXPECT_EQ(mixtures[i], mixtures[n + i]);
  }
  seen.clear();
  TsEval(probe, examples, {{2, 0.2}});
  for (const auto &rows : seen) {
    int total = 0;
    for (int r : rows) total += r;
    EXPECT_LE(total, 20);
  }
  EXPECT_THROW(TsEval(probe, examples, {{3, 0.0}}), TsasrError);
}

TEST(TsEvalTest, AllTargetsTranscribesEverySpeaker) {
  CorpusConfig c = SmallCorpus();
  c.speakers_per_mix = 3;
  auto examples = PrepareExamples(BuildCorpus(c, 6).examples);
  int calls = 0;
  Recognizer count = [&](const Matrix &, const std::vector<Matrix> &) {
    ++calls;
    return Hypothesis{};
  };
  EvalReport rep = TsEval(count, examples, {{1, 0.0}, true});
  EXPECT_EQ(calls, 3 * static_cast<int>(examples.size()));
  EXPECT_EQ(rep.per_example.size(), 3 * examples.size());
  EXPECT_EQ(rep.total.errors(), rep.total.n_ref_words);  // empty hypotheses
}

TEST(SnrSweepTest, DeterministicAndOneRowPerSnr) {
  TsAsrModel model(ModelConfig::Desk(), 7);
  CorpusConfig c = SmallCorpus();
  c.num_examples = 3;
  std::vector<double> snrs{-5, 0, 0, 5, 10};
  auto points = SnrSweep(ModelRecognizer(model), c, 8, snrs);
  ASSERT_EQ(points.size(), snrs.size());
  EXPECT_EQ(points[1].report.errors(), points[2].report.errors());
  std::ostringstream os;
  WriteSweepCsv(os, points);
  std::string csv = os.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST(SnrSweepTest, MixturesDifferOnlyInSnr) {
  CorpusConfig c = SmallCorpus();
  c.fixed_snr_db = -3.0;
  Corpus a = BuildCorpus(c, 9);
  c.fixed_snr_db = 7.0;
  Corpus b = BuildCorpus(c, 9);
  for (size_t i = 0; i < a.examples.size(); ++i) {
    EXPECT_EQ(a.examples[i].utt_ids, b.examples[i].utt_ids);
    EXPECT_EQ(a.examples[i].target_in_mixture.samples, b.examples[i].target_in_mixture.samples);
    EXPECT_DOUBLE_EQ(a.examples[i].snr_db, -3.0);
    EXPECT_DOUBLE_EQ(b.examples[i].snr_db, 7.0);
  }
}

}  // namespace
}  // namespace tsasr
