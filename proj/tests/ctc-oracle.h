// tests/ctc-oracle.h
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

#ifndef TSASR_TESTS_CTC_ORACLE_H_
#define TSASR_TESTS_CTC_ORACLE_H_

#include <cmath>
#include <vector>

#include "autodiff/tensor.h"

namespace tsasr::testing {

// Sum over every frame-label sequence of length T whose CTC collapse equals
// `labels`, in probability space.
inline double BruteForceCtc(const Tensor &log_probs, const std::vector<int> &labels) {
  int T = log_probs.dim(0), V = log_probs.dim(1);
  std::vector<int> seq(T, 0);
  double total = 0.0;
  while (true) {
    std::vector<int> collapsed;
    int prev = -1;
    for (int k : seq) {
      if (k != prev && k != 0) collapsed.push_back(k);
      prev = k;
    }
    if (collapsed == labels) {
      double lp = 0.0;
      for (int t = 0; t < T; ++t) lp += log_probs.at(t, seq[t]);
      total += std::exp(lp);
    }
    int t = 0;
    while (t < T && ++seq[t] == V) seq[t++] = 0;
    if (t == T) break;
  }
  return -std::log(total);
}

}  // namespace tsasr::testing

#endif  // TSASR_TESTS_CTC_ORACLE_H_
