// signal/synth.h
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

#ifndef TSASR_SIGNAL_SYNTH_H_
#define TSASR_SIGNAL_SYNTH_H_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "signal/waveform.h"

namespace tsasr {

// Vocabulary: index 0 is the CTC blank, 1..15 are the letters 'a'..'o' and
// 16 is the word boundary (written as a space).
constexpr int kBlank = 0;
constexpr int kNumLetters = 15;
constexpr int kWordBoundary = 16;
constexpr int kVocabSize = 16;  // excluding blank

constexpr double kTokenSeconds = 0.080;
constexpr double kWordGapSeconds = 0.040;
constexpr int kTokenSamples = 1280;
constexpr int kWordGapSamples = 640;

// Printable symbol for a token index ('|' for the word boundary, '-' for blank).
char TokenSymbol(int token);

struct Transcript {
  std::vector<int> tokens;

  // "ab c" -> [1, 2, 16, 3]. Throws kInvalidTranscript on other characters.
  static Transcript FromText(std::string_view text);
  std::string ToText() const;
  // Whitespace-delimited words; empty words (from repeated or edge
  // boundaries in decoder output) are dropped.
  std::vector<std::string> Words() const;
  bool empty() const { return tokens.empty(); }
  bool operator==(const Transcript &o) const { return tokens == o.tokens; }

  // Renderable transcripts: nonempty, tokens in [1, kVocabSize], no boundary
  // at either end and no two adjacent boundaries.
  void Validate() const;
};

struct SyntheticSpeaker {
  std::string speaker_id;
  double base_freq = 200.0;
  std::vector<double> timbre;  // relative harmonic amplitudes, unit sum
  // Vocal tract length: every formant of this voice is scaled by it.
  double formant_scale = 1.0;
  double vibrato_rate = 5.0;
};

// Voices with base frequencies at least 20 Hz apart.
std::vector<SyntheticSpeaker> MakeSpeakers(int count, uint64_t seed);

// The two formant centres (Hz) of a letter for a unit formant scale. A
// voice scales both by its formant_scale.
std::array<double, 2> LetterFormants(int token);

// Each letter is an 80 ms harmonic tone: the speaker's harmonic series,
// weighted by the speaker's timbre and shaped by the letter's formants.
// Each word boundary is 40 ms of silence. Deterministic in
// (speaker, transcript, seed).
Waveform RenderUtterance(const SyntheticSpeaker &speaker, const Transcript &transcript,
                         uint64_t seed);

}  // namespace tsasr

#endif  // TSASR_SIGNAL_SYNTH_H_
