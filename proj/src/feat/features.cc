// feat/features.cc
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

#include "feat/features.h"

#include <fftw3.h>

#include <cmath>
#include <iomanip>
#include <mutex>

#include "base/random.h"
#include "base/tsasr-error.h"

namespace tsasr {

int NumFrames(int64_t num_samples) {
  if (num_samples < kWindowSamples) return 0;
  return 1 + static_cast<int>((num_samples - kWindowSamples) / kHopSamples);
}

Matrix StftMagnitude(const Waveform &w) {
  int frames = NumFrames(w.size());
  if (frames == 0)
    Fail(ErrorKind::kTooShort, "waveform of " + std::to_string(w.size()) +
                                   " samples is shorter than one 400-sample window");
  static std::mutex plan_mutex;  // FFTW planning is not thread-safe
  double *in = fftw_alloc_real(kFftSize);
  fftw_complex *out = fftw_alloc_complex(kNumFreqBins);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    plan = fftw_plan_dft_r2c_1d(kFftSize, in, out, FFTW_ESTIMATE);
  }
  std::vector<double> window(kWindowSamples);
  for (int n = 0; n < kWindowSamples; ++n)
    window[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * n / kWindowSamples);  // periodic Hann
  Matrix mag(frames, kNumFreqBins);
  for (int f = 0; f < frames; ++f) {
    const double *src = w.samples.data() + static_cast<int64_t>(f) * kHopSamples;
    for (int n = 0; n < kFftSize; ++n) in[n] = n < kWindowSamples ? src[n] * window[n] : 0.0;
    fftw_execute(plan);
    for (int k = 0; k < kNumFreqBins; ++k) mag(f, k) = std::hypot(out[k][0], out[k][1]);
  }
  {
    std::lock_guard<std::mutex> lock(plan_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return mag;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(int num_mels, int fft_size, int sample_rate, double low_hz,
                             double high_hz)
    : num_mels_(num_mels) {
  double lo = HzToMel(low_hz), hi = HzToMel(high_hz);
  for (int i = 0; i < num_mels + 2; ++i)
    edges_hz_.push_back(MelToHz(lo + (hi - lo) * i / (num_mels + 1)));
  int bins = fft_size / 2 + 1;
  matrix_ = Matrix::Zero(num_mels, bins);
  for (int m = 0; m < num_mels; ++m)
    for (int k = 0; k < bins; ++k)
      matrix_(m, k) = Weight(m, static_cast<double>(k) * sample_rate / fft_size);
}

double MelFilterbank::Weight(int m, double hz) const {
  double l = edges_hz_[m], c = edges_hz_[m + 1], r = edges_hz_[m + 2];
  if (hz <= l || hz >= r) return 0.0;
  return hz <= c ? (hz - l) / (c - l) : (r - hz) / (r - c);
}

namespace {

const MelFilterbank &DefaultBank() {
  static const MelFilterbank bank;
  return bank;
}

}  // namespace

Matrix MelEnergies(const Matrix &magnitude) {
  if (magnitude.cols() != kNumFreqBins)
    Fail(ErrorKind::kShape, "expected " + std::to_string(kNumFreqBins) + " frequency bins, got " +
                                std::to_string(magnitude.cols()));
  Matrix power = magnitude.array().square().matrix();
  return power * DefaultBank().matrix().transpose();
}

void NormalizeMeanVariance(Matrix *values) {
  int frames = static_cast<int>(values->rows());
  if (frames == 0) return;
  for (int m = 0; m < values->cols(); ++m) {
    auto col = values->col(m);
    double mean = col.mean();
    double var = (col.array() - mean).square().mean();
    col = ((col.array() - mean) / std::sqrt(var + 1e-8)).matrix();
  }
}

Spectrogram LogMel(const Matrix &magnitude, bool normalize) {
  Spectrogram s;
  s.values = (MelEnergies(magnitude).array() + kLogFloor).log().matrix();
  if (normalize) NormalizeMeanVariance(&s.values);
  return s;
}

Spectrogram ComputeLogMel(const Waveform &w, bool normalize) {
  return LogMel(StftMagnitude(w), normalize);
}

Spectrogram ConcatSpectrograms(const std::vector<Spectrogram> &parts) {
  if (parts.empty()) Fail(ErrorKind::kShape, "no spectrograms to concatenate");
  int rows = 0;
  for (const auto &p : parts) {
    if (p.n_mels() != parts[0].n_mels())
      Fail(ErrorKind::kShape, "spectrograms differ in mel dimension");
    rows += p.frames();
  }
  Spectrogram out = parts[0];
  out.values.resize(rows, parts[0].n_mels());
  int r = 0;
  for (const auto &p : parts) {
    out.values.middleRows(r, p.frames()) = p.values;
    r += p.frames();
  }
  return out;
}

void SpecAugmentPolicy::Validate() const {
  if (n_freq_masks < 0 || n_time_masks < 0 || max_freq_width < 0 || max_time_width < 0)
    Fail(ErrorKind::kConfig, "SpecAugment counts and widths must be nonnegative");
}

Spectrogram SpecAugment(const Spectrogram &s, const SpecAugmentPolicy &policy, uint64_t seed) {
  policy.Validate();
  Spectrogram out = s;
  Rng rng(DeriveSeed(seed, 0x5a5a));
  int frames = s.frames(), mels = s.n_mels();
  auto stripe = [&rng](int extent, int max_width) -> std::pair<int, int> {
    int width = std::min(rng.UniformInt(1, std::max(1, max_width)), extent);
    int start = rng.UniformInt(0, extent - width);
    return {start, width};
  };
  if (mels > 0 && policy.max_freq_width > 0)
    for (int i = 0; i < policy.n_freq_masks; ++i) {
      auto [start, width] = stripe(mels, policy.max_freq_width);
      out.values.middleCols(start, width).setConstant(policy.fill);
    }
  if (frames > 0 && policy.max_time_width > 0)
    for (int i = 0; i < policy.n_time_masks; ++i) {
      auto [start, width] = stripe(frames, policy.max_time_width);
      out.values.middleRows(start, width).setConstant(policy.fill);
    }
  return out;
}

void WriteSpectrogramCsv(std::ostream &os, const Spectrogram &s) {
  os << std::setprecision(9);
  for (int t = 0; t < s.frames(); ++t) {
    for (int m = 0; m < s.n_mels(); ++m) os << (m ? "," : "") << s.values(t, m);
    os << '\n';
  }
}

}  // namespace tsasr
