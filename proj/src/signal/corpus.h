// signal/corpus.h
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

#ifndef TSASR_SIGNAL_CORPUS_H_
#define TSASR_SIGNAL_CORPUS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "signal/synth.h"
#include "signal/waveform.h"

namespace tsasr {

enum class MixProtocol { kWsj0, kLibri };

const char *MixProtocolName(MixProtocol p);
MixProtocol ParseMixProtocol(const std::string &name);

struct CorpusConfig {
  int num_speakers = 8;
  int utts_per_speaker = 10;
  int num_examples = 64;
  int speakers_per_mix = 2;  // 2-mix or 3-mix
  MixProtocol protocol = MixProtocol::kWsj0;
  // WSJ0 protocol: per-interferer SNR (target relative to interferer).
  double snr_min_db = 0.0;
  double snr_max_db = 5.0;
  // Overrides the sampled SNR (the draw is still consumed, so everything
  // else about the corpus stays the same).
  std::optional<double> fixed_snr_db;
  double speed_perturb_prob = 0.3;
  bool volume_perturb = true;
  int min_words = 1;
  int max_words = 2;
  // Two letters at least, so every utterance spans the subsampler minimum.
  int min_word_letters = 2;
  int max_word_letters = 3;
  double libri_max_extra_gap_sec = 0.5;
  // Emit each mixture once per speaker in it, each speaker taking a turn as
  // the target (the "-extr" convention). num_examples counts mixtures.
  bool all_targets = false;
  // Voices depend only on this seed, so corpora built with different build
  // seeds share speakers but not utterances.
  uint64_t speaker_seed = 0;

  void Validate() const;
};

struct Utterance {
  std::string utt_id;
  int speaker = 0;
  Transcript transcript;
  Waveform audio;
};

struct InterfererInfo {
  std::string speaker_id;
  Transcript transcript;
  std::string utt_id;
  Waveform auxiliary;
  std::string aux_utt_id;
};

struct MixtureExample {
  std::string example_id;
  Waveform mixture;
  Waveform auxiliary;
  // Second enrollment utterance for two-utterance evaluation; empty when the
  // speaker has too few utterances.
  Waveform auxiliary_extra;
  Transcript target_transcript;
  std::string target_speaker_id;
  // The clean target exactly as it sits inside `mixture` (same padding or
  // delay, perturbation and volume).
  Waveform target_in_mixture;
  double snr_db = 0.0;
  std::vector<double> snrs_db;
  std::vector<double> delays_sec;     // per component, target first
  std::vector<double> speed_factors;  // per component, target first
  double volume_factor = 1.0;
  std::vector<std::string> utt_ids;      // mixture components, target first
  std::vector<std::string> aux_utt_ids;  // auxiliary (and extra auxiliary)
  std::vector<InterfererInfo> interferers;
  MixProtocol protocol = MixProtocol::kWsj0;
};

struct Corpus {
  std::vector<SyntheticSpeaker> speakers;
  std::vector<Utterance> utterances;
  std::vector<MixtureExample> examples;
};

// Builds the utterance pool and the mixtures. Example i depends only on
// (config, seed, i).
Corpus BuildCorpus(const CorpusConfig &config, uint64_t seed);

// Writes <dir>/manifest.jsonl plus one WAV per waveform under <dir>/wav/.
// Paths in the manifest are relative to <dir>.
void WriteCorpus(const Corpus &corpus, const std::string &dir);
std::string ManifestLine(const MixtureExample &ex);

// Loads every row of a manifest, resolving audio paths relative to the
// manifest's directory. Missing audio raises kIo naming the row.
std::vector<MixtureExample> LoadManifest(const std::string &path);

}  // namespace tsasr

#endif  // TSASR_SIGNAL_CORPUS_H_
