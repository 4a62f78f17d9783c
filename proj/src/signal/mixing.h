// signal/mixing.h
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

#ifndef TSASR_SIGNAL_MIXING_H_
#define TSASR_SIGNAL_MIXING_H_

#include <cstdint>
#include <vector>

#include "base/random.h"
#include "signal/waveform.h"

namespace tsasr {

// gain such that P_target / (gain^2 * P_interferer) = 10^(snr_db / 10).
// Powers are measured over each utterance's own samples.
double SnrGain(const Waveform &target, const Waveform &interferer, double snr_db);

struct MixAtSnrResult {
  Waveform mixture;
  double gain = 1.0;
};

// target + gain * interferer (the shorter one is zero-extended at the end).
MixAtSnrResult MixAtSnr(const Waveform &target, const Waveform &interferer, double snr_db);

struct SnrRange {
  double min_db = 0.0;
  double max_db = 5.0;
};

struct ProtocolMix {
  Waveform mixture;
  // Scaled, padded or delayed components in input order; they sum to
  // `mixture`. components[0] is the target for the WSJ0 protocol.
  std::vector<Waveform> components;
  std::vector<double> gains;
  std::vector<double> snrs_db;     // per interferer (WSJ0 protocol only)
  std::vector<int64_t> offsets;    // leading silence / delay in samples
  std::vector<double> delays_sec;  // offsets in seconds
};

// WSJ0-2mix/3mix style: each interferer gets its own SNR relative to the
// target; every shorter utterance is padded at both ends (front length
// uniform in [0, deficit]) to the longest length.
ProtocolMix BuildWsj0Style(const Waveform &target, const std::vector<Waveform> &others,
                           const std::vector<double> &snrs_db, uint64_t seed);
// Same, with per-interferer SNRs drawn uniformly from `range`.
ProtocolMix BuildWsj0Style(const Waveform &target, const std::vector<Waveform> &others,
                           SnrRange range, uint64_t seed);

constexpr double kMinStartGapSeconds = 0.5;

// LibriSpeechMix style: utterances keep their amplitudes and are shifted by
// delays whose pairwise start differences are >= 0.5 s. Which utterance
// starts first is random; the earliest start is 0.
ProtocolMix BuildLibriStyle(const std::vector<Waveform> &utts, uint64_t seed,
                            double max_extra_gap_sec = 0.5);
// Sums utterances placed at the given delays (seconds).
ProtocolMix MixWithDelays(const std::vector<Waveform> &utts,
                          const std::vector<double> &delays_sec);

constexpr double kSpeedFactors[] = {0.95, 0.975, 1.0, 1.025, 1.05};
constexpr double kSpeedPerturbProbability = 0.3;
constexpr double kMinVolumeFactor = 0.125;
constexpr double kMaxVolumeFactor = 2.0;

// Resamples so that the output plays `factor` times faster; output length
// round(len / factor). Windowed-sinc interpolation (Kaiser, 16 taps a side).
Waveform SpeedPerturb(const Waveform &w, double factor);
Waveform VolumePerturb(const Waveform &w, double factor);

// 1.0 with probability 1 - prob, otherwise one of kSpeedFactors uniformly.
double SampleSpeedFactor(Rng *rng, double prob = kSpeedPerturbProbability);
double SampleVolumeFactor(Rng *rng);

}  // namespace tsasr

#endif  // TSASR_SIGNAL_MIXING_H_
