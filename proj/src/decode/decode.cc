// decode/decode.cc
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

#include "decode/decode.h"

#include <algorithm>
#include <cmath>
#include <iomanip>

#include "base/tsasr-error.h"

namespace tsasr {

std::vector<int> CollapsePath(const std::vector<int> &path) {
  std::vector<int> out;
  int prev = -1;
  for (int k : path) {
    if (k != prev && k != kBlank) out.push_back(k);
    prev = k;
  }
  return out;
}

Hypothesis GreedyDecode(const Tensor &log_probs) {
  CheckRank("greedy_decode", log_probs, 2);
  const int T = log_probs.dim(0), V = log_probs.dim(1);
  Hypothesis hyp;
  hyp.posteriors.resize(T, V);
  int prev = -1;
  for (int t = 0; t < T; ++t) {
    int best = 0;
    for (int k = 0; k < V; ++k) {
      hyp.posteriors(t, k) = std::exp(log_probs.at(t, k));
      if (log_probs.at(t, k) > log_probs.at(t, best)) best = k;
    }
    if (best != prev && best != kBlank) {
      hyp.tokens.tokens.push_back(best);
      hyp.frame_alignment.push_back(t);
    }
    prev = best;
  }
  return hyp;
}

double WerReport::wer_percent() const {
  if (n_ref_words <= 0) Fail(ErrorKind::kUndefinedWer, "WER of an empty reference");
  return 100.0 * errors() / n_ref_words;
}

WerReport &WerReport::operator+=(const WerReport &o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  n_ref_words += o.n_ref_words;
  return *this;
}

WerReport ComputeWer(const std::vector<std::string> &ref, const std::vector<std::string> &hyp) {
  if (ref.empty()) Fail(ErrorKind::kUndefinedWer, "WER needs a nonempty reference");
  const size_t R = ref.size(), H = hyp.size();
  std::vector<std::vector<int>> d(R + 1, std::vector<int>(H + 1));
  for (size_t i = 0; i <= R; ++i) d[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= H; ++j) d[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= R; ++i)
    for (size_t j = 1; j <= H; ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]), d[i - 1][j] + 1,
                          d[i][j - 1] + 1});
  WerReport rep;
  rep.n_ref_words = static_cast<int>(R);
  size_t i = R, j = H;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1])) {
      rep.substitutions += ref[i - 1] != hyp[j - 1];
      --i, --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++rep.deletions;
      --i;
    } else {
      ++rep.insertions;
      --j;
    }
  }
  return rep;
}

WerReport ComputeWer(const Transcript &ref, const Transcript &hyp) {
  return ComputeWer(ref.Words(), hyp.Words());
}

void WriteAlignmentCsv(std::ostream &os, const Hypothesis &hyp) {
  os << "frame,time_sec,token,probability\n";
  os << std::setprecision(6) << std::fixed;
  for (int t = 0; t < hyp.posteriors.rows(); ++t) {
    int best = 1;
    for (int k = 2; k < hyp.posteriors.cols(); ++k)
      if (hyp.posteriors(t, k) > hyp.posteriors(t, best)) best = k;
    os << t << ',' << t * kOutputFrameSec << ',' << TokenSymbol(best) << ','
       << hyp.posteriors(t, best) << '\n';
  }
}

}  // namespace tsasr
