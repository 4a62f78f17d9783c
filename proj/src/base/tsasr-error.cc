// base/tsasr-error.cc
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

#include "base/tsasr-error.h"

namespace tsasr {

const char *ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidTranscript: return "invalid-transcript";
    case ErrorKind::kDegenerateSignal: return "degenerate-signal";
    case ErrorKind::kProtocol: return "protocol";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kCorpusDesign: return "corpus-design";
    case ErrorKind::kTooShort: return "too-short";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kNonFinite: return "non-finite";
    case ErrorKind::kInfeasibleAlignment: return "infeasible-alignment";
    case ErrorKind::kDegenerateReference: return "degenerate-reference";
    case ErrorKind::kUndefinedWer: return "undefined-wer";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kFormat: return "format";
  }
  return "unknown";
}

}  // namespace tsasr
