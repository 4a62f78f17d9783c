// signal/waveform.h
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

#ifndef TSASR_SIGNAL_WAVEFORM_H_
#define TSASR_SIGNAL_WAVEFORM_H_

#include <string>
#include <vector>

namespace tsasr {

constexpr int kSampleRate = 16000;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  int64_t size() const { return static_cast<int64_t>(samples.size()); }
  double Duration() const { return static_cast<double>(samples.size()) / sample_rate; }
  // Mean squared amplitude.
  double Power() const;
  // Throws kDegenerateSignal if empty or non-finite.
  void Validate(const char *what) const;
};

// Zero-extends `w` with `front` and `back` samples.
Waveform Pad(const Waveform &w, int64_t front, int64_t back);
Waveform ScaleWaveform(const Waveform &w, double factor);
// Sums waveforms, zero-extending the shorter ones at the end.
Waveform SumWaveforms(const std::vector<Waveform> &parts);
Waveform ConcatWaveforms(const std::vector<Waveform> &parts);

enum class WavFormat { kFloat32, kPcm16 };

// Mono RIFF/WAVE. The reader accepts 16-bit PCM and 32-bit IEEE float.
void WriteWav(const std::string &path, const Waveform &w,
              WavFormat format = WavFormat::kFloat32);
Waveform ReadWav(const std::string &path);

}  // namespace tsasr

#endif  // TSASR_SIGNAL_WAVEFORM_H_
