// decode/decode.h
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

#ifndef TSASR_DECODE_DECODE_H_
#define TSASR_DECODE_DECODE_H_

#include <ostream>
#include <string>
#include <vector>

#include "autodiff/tensor.h"
#include "feat/features.h"
#include "signal/synth.h"

namespace tsasr {

// Seconds per output frame after 4x subsampling of a 10 ms hop.
constexpr double kOutputFrameSec = 0.04;

struct Hypothesis {
  Transcript tokens;                 // may be empty
  std::vector<int> frame_alignment;  // first frame of each emitted token
  Matrix posteriors;                 // [T', vocab] probabilities
};

// Merges adjacent repeats and drops blanks.
std::vector<int> CollapsePath(const std::vector<int> &path);

Hypothesis GreedyDecode(const Tensor &log_probs);

struct WerReport {
  int substitutions = 0;
  int insertions = 0;
  int deletions = 0;
  int n_ref_words = 0;

  int errors() const { return substitutions + insertions + deletions; }
  double wer_percent() const;
  WerReport &operator+=(const WerReport &o);
};

// Unit-cost word Levenshtein alignment. Among minimum-cost alignments the
// backtrace prefers a substitution over an insertion-deletion pair. Throws
// kUndefinedWer for an empty reference.
WerReport ComputeWer(const std::vector<std::string> &ref, const std::vector<std::string> &hyp);
WerReport ComputeWer(const Transcript &ref, const Transcript &hyp);

// One row per output frame: frame, time_sec, token, probability, where token
// is the most probable non-blank symbol at that frame.
void WriteAlignmentCsv(std::ostream &os, const Hypothesis &hyp);

}  // namespace tsasr

#endif  // TSASR_DECODE_DECODE_H_
