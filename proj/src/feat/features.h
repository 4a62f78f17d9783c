// feat/features.h
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

#ifndef TSASR_FEAT_FEATURES_H_
#define TSASR_FEAT_FEATURES_H_

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <vector>

#include "signal/waveform.h"

namespace tsasr {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr int kFftSize = 512;
constexpr int kWindowSamples = 400;  // 25 ms
constexpr int kHopSamples = 160;     // 10 ms
constexpr int kNumFreqBins = kFftSize / 2 + 1;
constexpr int kNumMels = 80;
constexpr double kLogFloor = 1e-10;

// 1 + floor((len - 400) / 160), or 0 when shorter than one window.
int NumFrames(int64_t num_samples);

// |DFT| of Hann-windowed 400-sample frames zero-padded to 512 points:
// [frames, 257]. Throws kTooShort for inputs shorter than one window.
Matrix StftMagnitude(const Waveform &w);

double HzToMel(double hz);
double MelToHz(double mel);

// Triangular filters equally spaced on the HTK mel scale over [0, 8 kHz],
// with unit peak (no area normalization).
class MelFilterbank {
 public:
  explicit MelFilterbank(int num_mels = kNumMels, int fft_size = kFftSize,
                         int sample_rate = kSampleRate, double low_hz = 0.0,
                         double high_hz = 8000.0);

  int num_mels() const { return num_mels_; }
  double CenterHz(int m) const { return edges_hz_[m + 1]; }
  // Continuous triangle response of filter m at `hz`.
  double Weight(int m, double hz) const;
  // [num_mels, fft_size / 2 + 1]
  const Matrix &matrix() const { return matrix_; }

 private:
  int num_mels_;
  std::vector<double> edges_hz_;
  Matrix matrix_;
};

struct Spectrogram {
  Matrix values;  // [frames, n_mels]
  double frame_hop = 0.010;
  double frame_window = 0.025;

  int frames() const { return static_cast<int>(values.rows()); }
  int n_mels() const { return static_cast<int>(values.cols()); }
};

// Mel energies M * |X|^2 before the log: [frames, n_mels].
Matrix MelEnergies(const Matrix &magnitude);
// ln(mel energy + 1e-10), optionally followed by per-utterance mean and
// variance normalization of every mel bin.
Spectrogram LogMel(const Matrix &magnitude, bool normalize = true);
void NormalizeMeanVariance(Matrix *values);
Spectrogram ComputeLogMel(const Waveform &w, bool normalize = true);

Spectrogram ConcatSpectrograms(const std::vector<Spectrogram> &parts);

// Defaults are sized for the synthetic corpus: a letter lasts 8 frames, so a
// time stripe never hides more than a fraction of one.
struct SpecAugmentPolicy {
  int n_freq_masks = 2;
  int max_freq_width = 8;
  int n_time_masks = 1;
  int max_time_width = 3;
  double fill = 0.0;

  static SpecAugmentPolicy None() { return {0, 0, 0, 0, 0.0}; }
  void Validate() const;
};

// Frequency and time stripes of width drawn from [1, max width], clipped to
// the grid, filled with `policy.fill`. Deterministic in `seed`.
Spectrogram SpecAugment(const Spectrogram &s, const SpecAugmentPolicy &policy, uint64_t seed);

// One row per frame, n_mels comma-separated values.
void WriteSpectrogramCsv(std::ostream &os, const Spectrogram &s);

}  // namespace tsasr

#endif  // TSASR_FEAT_FEATURES_H_
