// signal/mixing.cc
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

#include "signal/mixing.h"

#include <algorithm>
#include <cmath>

#include "base/tsasr-error.h"

namespace tsasr {

double SnrGain(const Waveform &target, const Waveform &interferer, double snr_db) {
  if (target.sample_rate != interferer.sample_rate)
    Fail(ErrorKind::kDegenerateSignal, "sample rates differ: " +
                                           std::to_string(target.sample_rate) + " vs " +
                                           std::to_string(interferer.sample_rate));
  double pt = target.Power(), pi = interferer.Power();
  if (!(pt > 0.0) || !(pi > 0.0))
    Fail(ErrorKind::kDegenerateSignal, "cannot mix a zero-power signal at a given SNR");
  return std::sqrt(pt / (pi * std::pow(10.0, snr_db / 10.0)));
}

MixAtSnrResult MixAtSnr(const Waveform &target, const Waveform &interferer, double snr_db) {
  MixAtSnrResult r;
  r.gain = SnrGain(target, interferer, snr_db);
  r.mixture = SumWaveforms({target, ScaleWaveform(interferer, r.gain)});
  return r;
}

ProtocolMix BuildWsj0Style(const Waveform &target, const std::vector<Waveform> &others,
                           const std::vector<double> &snrs_db, uint64_t seed) {
  if (others.empty() || others.size() > 2)
    Fail(ErrorKind::kProtocol, "WSJ0-style mixing needs 1 or 2 interferers, got " +
                                   std::to_string(others.size()));
  if (snrs_db.size() != others.size())
    Fail(ErrorKind::kProtocol, "one SNR per interferer is required");
  target.Validate("target");
  Rng rng(DeriveSeed(seed, 0x3a11));
  ProtocolMix mix;
  std::vector<const Waveform *> parts = {&target};
  for (const auto &o : others) {
    o.Validate("interferer");
    parts.push_back(&o);
  }
  int64_t longest = 0;
  for (auto *p : parts) longest = std::max(longest, p->size());
  mix.gains.push_back(1.0);
  for (size_t i = 0; i < others.size(); ++i) {
    mix.gains.push_back(SnrGain(target, others[i], snrs_db[i]));
    mix.snrs_db.push_back(snrs_db[i]);
  }
  for (size_t i = 0; i < parts.size(); ++i) {
    int64_t deficit = longest - parts[i]->size();
    int64_t front = deficit > 0 ? rng.UniformInt(0, static_cast<int>(deficit)) : 0;
    mix.offsets.push_back(front);
    mix.delays_sec.push_back(static_cast<double>(front) / parts[i]->sample_rate);
    mix.components.push_back(Pad(ScaleWaveform(*parts[i], mix.gains[i]), front, deficit - front));
  }
  mix.mixture = SumWaveforms(mix.components);
  return mix;
}

ProtocolMix BuildWsj0Style(const Waveform &target, const std::vector<Waveform> &others,
                           SnrRange range, uint64_t seed) {
  if (range.max_db < range.min_db) Fail(ErrorKind::kConfig, "SNR range is inverted");
  Rng rng(DeriveSeed(seed, 0x54a2));
  std::vector<double> snrs;
  for (size_t i = 0; i < others.size(); ++i) snrs.push_back(rng.Uniform(range.min_db, range.max_db));
  return BuildWsj0Style(target, others, snrs, seed);
}

ProtocolMix MixWithDelays(const std::vector<Waveform> &utts,
                          const std::vector<double> &delays_sec) {
  if (utts.size() != delays_sec.size())
    Fail(ErrorKind::kProtocol, "one delay per utterance is required");
  ProtocolMix mix;
  int64_t total = 0;
  for (size_t i = 0; i < utts.size(); ++i) {
    utts[i].Validate("utterance");
    int64_t off = std::llround(delays_sec[i] * utts[i].sample_rate);
    if (off < 0) Fail(ErrorKind::kProtocol, "negative delay");
    mix.offsets.push_back(off);
    mix.delays_sec.push_back(delays_sec[i]);
    mix.gains.push_back(1.0);
    total = std::max(total, off + utts[i].size());
  }
  for (size_t i = 0; i < utts.size(); ++i)
    mix.components.push_back(Pad(utts[i], mix.offsets[i], total - mix.offsets[i] - utts[i].size()));
  mix.mixture = SumWaveforms(mix.components);
  return mix;
}

ProtocolMix BuildLibriStyle(const std::vector<Waveform> &utts, uint64_t seed,
                            double max_extra_gap_sec) {
  if (utts.size() < 2 || utts.size() > 3)
    Fail(ErrorKind::kProtocol, "LibriSpeech-style mixing needs 2 or 3 utterances, got " +
                                   std::to_string(utts.size()));
  if (max_extra_gap_sec < 0.0) Fail(ErrorKind::kConfig, "negative extra delay");
  Rng rng(DeriveSeed(seed, 0x11b7));
  std::vector<int> order = rng.Permutation(static_cast<int>(utts.size()));
  std::vector<double> delays(utts.size(), 0.0);
  // Starts are laid out on a grid of whole samples so that the rounding in
  // MixWithDelays cannot shrink a gap below the minimum.
  int64_t start = 0;
  for (size_t k = 0; k < order.size(); ++k) {
    if (k > 0) {
      double gap = kMinStartGapSeconds + rng.Uniform(0.0, max_extra_gap_sec);
      start += static_cast<int64_t>(std::ceil(gap * kSampleRate));
    }
    delays[order[k]] = static_cast<double>(start) / kSampleRate;
  }
  return MixWithDelays(utts, delays);
}

Waveform SpeedPerturb(const Waveform &w, double factor) {
  // Every allowed factor is num/den exactly, so the fractional read position
  // cycles through `den` phases and the filter taps can be tabulated.
  static constexpr struct {
    double factor;
    int num, den;
  } kRational[] = {{0.95, 19, 20}, {0.975, 39, 40}, {1.0, 1, 1}, {1.025, 41, 40}, {1.05, 21, 20}};
  int num = 0, den = 0;
  for (const auto &r : kRational)
    if (std::abs(r.factor - factor) < 1e-12) num = r.num, den = r.den;
  if (den == 0)
    Fail(ErrorKind::kConfig, "speed factor " + std::to_string(factor) +
                                 " is not one of {0.95, 0.975, 1.0, 1.025, 1.05}");
  if (num == den) return w;
  constexpr int kHalfTaps = 16;
  constexpr double kBeta = 8.0;
  const double cutoff = 0.5 * std::min(1.0, static_cast<double>(den) / num);
  const double i0_beta = std::cyl_bessel_i(0.0, kBeta);
  // taps[phase][j] weights input sample base - kHalfTaps + 1 + j.
  std::vector<std::vector<double>> taps(den, std::vector<double>(2 * kHalfTaps, 0.0));
  for (int phase = 0; phase < den; ++phase) {
    double frac = static_cast<double>(phase) / den;
    for (int j = 0; j < 2 * kHalfTaps; ++j) {
      double d = frac + kHalfTaps - 1 - j;  // x - k
      double u = d / kHalfTaps;
      if (std::abs(u) >= 1.0) continue;
      double arg = 2.0 * cutoff * d;
      double sinc = arg == 0.0 ? 1.0 : std::sin(M_PI * arg) / (M_PI * arg);
      double win = std::cyl_bessel_i(0.0, kBeta * std::sqrt(1.0 - u * u)) / i0_beta;
      taps[phase][j] = 2.0 * cutoff * sinc * win;
    }
  }
  int64_t n_in = w.size();
  int64_t n_out = std::llround(static_cast<double>(n_in) * den / num);
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.resize(n_out);
  for (int64_t n = 0; n < n_out; ++n) {
    int64_t pos = n * num;
    int64_t base = pos / den;
    const auto &tp = taps[pos % den];
    double acc = 0.0;
    for (int j = 0; j < 2 * kHalfTaps; ++j) {
      int64_t k = base - kHalfTaps + 1 + j;
      if (k >= 0 && k < n_in) acc += w.samples[k] * tp[j];
    }
    out.samples[n] = acc;
  }
  return out;
}

Waveform VolumePerturb(const Waveform &w, double factor) {
  if (factor < kMinVolumeFactor || factor > kMaxVolumeFactor)
    Fail(ErrorKind::kConfig, "volume factor " + std::to_string(factor) +
                                 " outside [0.125, 2.0]");
  return ScaleWaveform(w, factor);
}

double SampleSpeedFactor(Rng *rng, double prob) {
  // Both draws are always taken so the stream position does not depend on
  // the outcome.
  bool perturb = rng->Bernoulli(prob);
  int idx = rng->UniformInt(0, 4);
  return perturb ? kSpeedFactors[idx] : 1.0;
}

double SampleVolumeFactor(Rng *rng) { return rng->Uniform(kMinVolumeFactor, kMaxVolumeFactor); }

}  // namespace tsasr
