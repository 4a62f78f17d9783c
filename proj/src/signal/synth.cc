// signal/synth.cc
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

#include "signal/synth.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "base/random.h"
#include "base/tsasr-error.h"

namespace tsasr {

namespace {

constexpr int kNumHarmonics = 32;
constexpr double kTokenAmplitude = 0.8;  // sum of harmonic amplitudes
constexpr double kFormantSigmaHz = 90.0;
constexpr double kVibratoDepth = 0.01;
constexpr double kRampSeconds = 0.005;
constexpr double kMaxPartialHz = 7600.0;

}  // namespace

char TokenSymbol(int token) {
  if (token == kBlank) return '-';
  if (token == kWordBoundary) return '|';
  if (token >= 1 && token <= kNumLetters) return static_cast<char>('a' + token - 1);
  return '?';
}

Transcript Transcript::FromText(std::string_view text) {
  Transcript t;
  for (char c : text) {
    if (c == ' ') {
      t.tokens.push_back(kWordBoundary);
    } else if (c >= 'a' && c < 'a' + kNumLetters) {
      t.tokens.push_back(c - 'a' + 1);
    } else {
      Fail(ErrorKind::kInvalidTranscript,
           "character '" + std::string(1, c) + "' is not in the vocabulary");
    }
  }
  return t;
}

std::string Transcript::ToText() const {
  std::string s;
  for (int tok : tokens) s.push_back(tok == kWordBoundary ? ' ' : TokenSymbol(tok));
  return s;
}

std::vector<std::string> Transcript::Words() const {
  std::vector<std::string> words;
  std::string cur;
  for (int tok : tokens) {
    if (tok == kWordBoundary) {
      if (!cur.empty()) words.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(TokenSymbol(tok));
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

void Transcript::Validate() const {
  if (tokens.empty()) Fail(ErrorKind::kInvalidTranscript, "empty transcript");
  for (size_t i = 0; i < tokens.size(); ++i) {
    int tok = tokens[i];
    if (tok == kBlank)
      Fail(ErrorKind::kInvalidTranscript,
           "transcript contains the blank token at position " + std::to_string(i));
    if (tok < 1 || tok > kVocabSize)
      Fail(ErrorKind::kInvalidTranscript, "token " + std::to_string(tok) + " out of range");
    if (tok == kWordBoundary &&
        (i == 0 || i + 1 == tokens.size() || tokens[i - 1] == kWordBoundary))
      Fail(ErrorKind::kInvalidTranscript, "misplaced word boundary in '" + ToText() + "'");
  }
}

std::vector<SyntheticSpeaker> MakeSpeakers(int count, uint64_t seed) {
  if (count < 1) Fail(ErrorKind::kConfig, "speaker count must be positive");
  Rng rng(DeriveSeed(seed, 0x5eed));
  std::vector<SyntheticSpeaker> speakers;
  for (int i = 0; i < count; ++i) {
    SyntheticSpeaker s;
    char id[16];
    std::snprintf(id, sizeof(id), "spk%02d", i);
    s.speaker_id = id;
    // Evenly spread over 120-400 Hz (wider for many voices); the jitter
    // keeps neighbours at least 20 Hz apart.
    double spacing = count > 1 ? std::max(280.0 / (count - 1), 25.0) : 0.0;
    s.base_freq = 120.0 + spacing * i + rng.Uniform(0.0, 0.2 * spacing);
    // Higher voices have shorter vocal tracts: 0.5 at 120 Hz to 2 at
    // 400 Hz, geometric in between.
    s.formant_scale = 0.5 * std::pow(4.0, (s.base_freq - 120.0) / 280.0);
    // Smooth spectral tilt with mild per-harmonic ripple.
    double tilt = rng.Uniform(0.0, 0.8);
    double total = 0.0;
    for (int h = 0; h < kNumHarmonics; ++h) {
      s.timbre.push_back(std::pow(h + 1.0, -tilt) * rng.Uniform(0.6, 1.0));
      total += s.timbre.back();
    }
    for (double &a : s.timbre) a /= total;
    s.vibrato_rate = rng.Uniform(4.0, 7.0);
    speakers.push_back(std::move(s));
  }
  return speakers;
}

std::array<double, 2> LetterFormants(int token) {
  static constexpr double kLow[] = {400.0, 650.0, 900.0};
  static constexpr double kHigh[] = {1200.0, 1450.0, 1700.0, 1950.0, 2200.0};
  if (token < 1 || token > kNumLetters)
    Fail(ErrorKind::kInvalidTranscript, "token " + std::to_string(token) + " is not a letter");
  return {kLow[(token - 1) % 3], kHigh[(token - 1) / 3]};
}

Waveform RenderUtterance(const SyntheticSpeaker &speaker, const Transcript &transcript,
                         uint64_t seed) {
  transcript.Validate();
  Rng rng(DeriveSeed(seed, 0x7a1e));
  Waveform out;
  const double dt = 1.0 / kSampleRate;
  const int ramp = static_cast<int>(kRampSeconds * kSampleRate);
  double vibrato_phase = rng.Uniform(0.0, 2.0 * M_PI);
  int64_t t0 = 0;
  for (int tok : transcript.tokens) {
    if (tok == kWordBoundary) {
      out.samples.insert(out.samples.end(), kWordGapSamples, 0.0);
      t0 += kWordGapSamples;
      continue;
    }
    std::array<double, 2> formants = LetterFormants(tok);
    for (double &f : formants) f *= speaker.formant_scale;
    const double sigma = kFormantSigmaHz * speaker.formant_scale;
    struct Component {
      double freq, amp, phase;
    };
    std::vector<Component> comps;
    double total = 0.0;
    for (size_t h = 0; h < speaker.timbre.size(); ++h) {
      double f = speaker.base_freq * static_cast<double>(h + 1);
      double phase = rng.Uniform(0.0, 2.0 * M_PI);
      if (f > kMaxPartialHz) continue;
      auto bump = [&](double fc) {
        double z = (f - fc) / sigma;
        return std::exp(-0.5 * z * z);
      };
      double amp = speaker.timbre[h] * (bump(formants[0]) + bump(formants[1]));
      comps.push_back({f, amp, phase});
      total += amp;
    }
    // Loudness is fixed per token so no voice or letter dominates a mix.
    double gain = kTokenAmplitude * rng.Uniform(0.85, 1.0) / total;
    for (auto &c : comps) c.amp *= gain;
    for (int n = 0; n < kTokenSamples; ++n) {
      double t = static_cast<double>(t0 + n) * dt;
      // Integrated phase of f * (1 + depth * sin(2 pi rate t + phi)).
      double mod = -kVibratoDepth / (2.0 * M_PI * speaker.vibrato_rate) *
                   std::cos(2.0 * M_PI * speaker.vibrato_rate * t + vibrato_phase);
      double env = 1.0;
      if (n < ramp) env = 0.5 - 0.5 * std::cos(M_PI * n / ramp);
      if (n >= kTokenSamples - ramp)
        env = 0.5 - 0.5 * std::cos(M_PI * (kTokenSamples - 1 - n) / ramp);
      double v = 0.0;
      for (const auto &c : comps)
        v += c.amp * std::sin(2.0 * M_PI * c.freq * (t + mod) + c.phase);
      out.samples.push_back(env * v);
    }
    t0 += kTokenSamples;
  }
  for (double x : out.samples)
    if (!(std::abs(x) <= 1.0))
      Fail(ErrorKind::kDegenerateSignal, "synthesized sample out of [-1, 1]");
  return out;
}

}  // namespace tsasr
