// base/tsasr-error.h
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

#ifndef TSASR_BASE_TSASR_ERROR_H_
#define TSASR_BASE_TSASR_ERROR_H_

#include <stdexcept>
#include <string>

namespace tsasr {

enum class ErrorKind {
  kInvalidTranscript,
  kDegenerateSignal,
  kProtocol,
  kConfig,
  kCorpusDesign,
  kTooShort,
  kShape,
  kContract,
  kNonFinite,
  kInfeasibleAlignment,
  kDegenerateReference,
  kUndefinedWer,
  kIo,
  kFormat,
};

const char *ErrorKindName(ErrorKind kind);

// Every recoverable failure in the library is reported as a TsasrError; the
// kind lets callers (and tests) dispatch without parsing messages.
class TsasrError : public std::runtime_error {
 public:
  TsasrError(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string &what) {
  throw TsasrError(kind, what);
}

}  // namespace tsasr

#endif  // TSASR_BASE_TSASR_ERROR_H_
