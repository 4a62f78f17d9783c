// signal/corpus.cc
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

#include "signal/corpus.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "base/random.h"
#include "base/tsasr-error.h"
#include "json.hpp"
#include "signal/mixing.h"

namespace tsasr {

namespace fs = std::filesystem;
using nlohmann::json;

const char *MixProtocolName(MixProtocol p) {
  return p == MixProtocol::kWsj0 ? "wsj0" : "libri";
}

MixProtocol ParseMixProtocol(const std::string &name) {
  if (name == "wsj0") return MixProtocol::kWsj0;
  if (name == "libri") return MixProtocol::kLibri;
  Fail(ErrorKind::kConfig, "unknown mixing protocol '" + name + "' (expected wsj0 or libri)");
}

void CorpusConfig::Validate() const {
  if (num_speakers < speakers_per_mix)
    Fail(ErrorKind::kConfig, "need at least as many speakers as speakers per mixture");
  if (speakers_per_mix < 2 || speakers_per_mix > 3)
    Fail(ErrorKind::kConfig, "speakers_per_mix must be 2 or 3");
  if (utts_per_speaker < 1 || num_examples < 0)
    Fail(ErrorKind::kConfig, "utterance and example counts must be positive");
  if (snr_max_db < snr_min_db) Fail(ErrorKind::kConfig, "snr_max_db < snr_min_db");
  if (min_words < 1 || max_words < min_words || min_word_letters < 1 ||
      max_word_letters < min_word_letters)
    Fail(ErrorKind::kConfig, "invalid word/letter count range");
  if (speed_perturb_prob < 0.0 || speed_perturb_prob > 1.0)
    Fail(ErrorKind::kConfig, "speed_perturb_prob must be in [0, 1]");
}

namespace {

Transcript RandomTranscript(const CorpusConfig &c, Rng *rng) {
  Transcript t;
  int words = rng->UniformInt(c.min_words, c.max_words);
  for (int w = 0; w < words; ++w) {
    if (w > 0) t.tokens.push_back(kWordBoundary);
    int letters = rng->UniformInt(c.min_word_letters, c.max_word_letters);
    for (int l = 0; l < letters; ++l) t.tokens.push_back(rng->UniformInt(1, kNumLetters));
  }
  return t;
}

// Index of an utterance of `speaker` other than those in `exclude`, or -1.
int PickUtterance(Rng *rng, int utts_per_speaker, const std::vector<int> &exclude) {
  std::vector<int> choices;
  for (int u = 0; u < utts_per_speaker; ++u)
    if (std::find(exclude.begin(), exclude.end(), u) == exclude.end()) choices.push_back(u);
  // One draw regardless of the outcome keeps streams aligned.
  int r = rng->UniformInt(0, utts_per_speaker - 1);
  if (choices.empty()) return -1;
  return choices[r % choices.size()];
}

// The same mixture with interferer k - 1 as the target and the original
// target as an interferer. Interferers have a single enrollment utterance.
MixtureExample Retarget(const MixtureExample &ex, const ProtocolMix &mix, size_t k) {
  MixtureExample r = ex;
  const InterfererInfo &in = ex.interferers[k - 1];
  r.example_id = ex.example_id + "_t" + std::to_string(k);
  r.target_speaker_id = in.speaker_id;
  r.target_transcript = in.transcript;
  r.auxiliary = in.auxiliary;
  r.auxiliary_extra = Waveform{};
  r.aux_utt_ids = {in.aux_utt_id};
  r.target_in_mixture = ScaleWaveform(mix.components[k], ex.volume_factor);
  InterfererInfo old;
  old.speaker_id = ex.target_speaker_id;
  old.transcript = ex.target_transcript;
  old.utt_id = ex.utt_ids[0];
  old.auxiliary = ex.auxiliary;
  old.aux_utt_id = ex.aux_utt_ids[0];
  r.interferers.clear();
  r.snrs_db.clear();
  // SNR(k vs j) = SNR(0 vs j) - SNR(0 vs k), with SNR(0 vs 0) = 0.
  auto snr0 = [&](size_t j) { return j == 0 ? 0.0 : ex.snrs_db[j - 1]; };
  std::vector<size_t> order = {k};
  for (size_t j = 0; j < ex.utt_ids.size(); ++j) {
    if (j == k) continue;
    order.push_back(j);
    r.interferers.push_back(j == 0 ? old : ex.interferers[j - 1]);
    r.snrs_db.push_back(snr0(j) - snr0(k));
  }
  r.snr_db = r.snrs_db[0];
  r.utt_ids.clear();
  r.speed_factors.clear();
  r.delays_sec.clear();
  for (size_t j : order) {
    r.utt_ids.push_back(ex.utt_ids[j]);
    r.speed_factors.push_back(ex.speed_factors[j]);
    r.delays_sec.push_back(ex.delays_sec[j]);
  }
  return r;
}

}  // namespace

Corpus BuildCorpus(const CorpusConfig &config, uint64_t seed) {
  config.Validate();
  Corpus corpus;
  corpus.speakers = MakeSpeakers(config.num_speakers, config.speaker_seed);
  const int ups = config.utts_per_speaker;
  for (int s = 0; s < config.num_speakers; ++s)
    for (int u = 0; u < ups; ++u) {
      Rng rng(DeriveSeed(seed, 2, static_cast<uint64_t>(s) * 100003 + u));
      Utterance utt;
      char id[32];
      std::snprintf(id, sizeof(id), "%s_u%03d", corpus.speakers[s].speaker_id.c_str(), u);
      utt.utt_id = id;
      utt.speaker = s;
      utt.transcript = RandomTranscript(config, &rng);
      utt.audio = RenderUtterance(corpus.speakers[s], utt.transcript, rng.NextU64());
      corpus.utterances.push_back(std::move(utt));
    }
  auto utt = [&](int s, int u) -> const Utterance & { return corpus.utterances[s * ups + u]; };

  for (int i = 0; i < config.num_examples; ++i) {
    Rng rng(DeriveSeed(seed, 1, i));
    MixtureExample ex;
    char id[32];
    std::snprintf(id, sizeof(id), "ex%05d", i);
    ex.example_id = id;
    ex.protocol = config.protocol;
    std::vector<int> perm = rng.Permutation(config.num_speakers);
    std::vector<int> spk(perm.begin(), perm.begin() + config.speakers_per_mix);
    int target = spk[0];
    if (ups < 2)
      Fail(ErrorKind::kCorpusDesign, "target speaker " + corpus.speakers[target].speaker_id +
                                         " has fewer than 2 utterances");
    int mix_u = rng.UniformInt(0, ups - 1);
    int aux_u = PickUtterance(&rng, ups, {mix_u});
    int extra_u = PickUtterance(&rng, ups, {mix_u, aux_u});
    ex.target_speaker_id = corpus.speakers[target].speaker_id;
    ex.target_transcript = utt(target, mix_u).transcript;
    ex.auxiliary = utt(target, aux_u).audio;
    ex.aux_utt_ids.push_back(utt(target, aux_u).utt_id);
    if (extra_u >= 0) {
      ex.auxiliary_extra = utt(target, extra_u).audio;
      ex.aux_utt_ids.push_back(utt(target, extra_u).utt_id);
    }

    std::vector<Waveform> components;
    ex.utt_ids.push_back(utt(target, mix_u).utt_id);
    ex.speed_factors.push_back(SampleSpeedFactor(&rng, config.speed_perturb_prob));
    components.push_back(SpeedPerturb(utt(target, mix_u).audio, ex.speed_factors.back()));
    for (size_t k = 1; k < spk.size(); ++k) {
      int s = spk[k];
      int u = rng.UniformInt(0, ups - 1);
      int a = PickUtterance(&rng, ups, {u});
      if (a < 0) a = u;
      InterfererInfo info;
      info.speaker_id = corpus.speakers[s].speaker_id;
      info.transcript = utt(s, u).transcript;
      info.utt_id = utt(s, u).utt_id;
      info.auxiliary = utt(s, a).audio;
      info.aux_utt_id = utt(s, a).utt_id;
      ex.interferers.push_back(std::move(info));
      ex.utt_ids.push_back(utt(s, u).utt_id);
      ex.speed_factors.push_back(SampleSpeedFactor(&rng, config.speed_perturb_prob));
      components.push_back(SpeedPerturb(utt(s, u).audio, ex.speed_factors.back()));
    }

    std::vector<double> snrs;
    for (size_t k = 1; k < spk.size(); ++k) {
      double draw = rng.Uniform(config.snr_min_db, config.snr_max_db);
      snrs.push_back(config.fixed_snr_db.value_or(draw));
    }
    uint64_t mix_seed = rng.NextU64();
    ProtocolMix mix;
    if (config.protocol == MixProtocol::kWsj0) {
      std::vector<Waveform> others(components.begin() + 1, components.end());
      mix = BuildWsj0Style(components[0], others, snrs, mix_seed);
      ex.snrs_db = mix.snrs_db;
      ex.snr_db = mix.snrs_db[0];
    } else {
      mix = BuildLibriStyle(components, mix_seed, config.libri_max_extra_gap_sec);
      for (size_t k = 1; k < components.size(); ++k)
        ex.snrs_db.push_back(10.0 * std::log10(components[0].Power() / components[k].Power()));
      ex.snr_db = ex.snrs_db[0];
    }
    ex.delays_sec = mix.delays_sec;
    double volume = SampleVolumeFactor(&rng);
    ex.volume_factor = config.volume_perturb ? volume : 1.0;
    ex.mixture = VolumePerturb(mix.mixture, ex.volume_factor);
    ex.target_in_mixture = ScaleWaveform(mix.components[0], ex.volume_factor);
    std::vector<MixtureExample> extra;
    if (config.all_targets)
      for (size_t k = 1; k < mix.components.size(); ++k) extra.push_back(Retarget(ex, mix, k));
    corpus.examples.push_back(std::move(ex));
    for (auto &e : extra) corpus.examples.push_back(std::move(e));
  }
  return corpus;
}

namespace {

json StringArray(const std::vector<std::string> &v) { return json(v); }

}  // namespace

std::string ManifestLine(const MixtureExample &ex) {
  const std::string base = "wav/" + ex.example_id;
  json j;
  j["id"] = ex.example_id;
  j["mixture_path"] = base + "_mix.wav";
  j["target_path"] = base + "_target.wav";
  j["auxiliary_path"] = base + "_aux.wav";
  j["auxiliary_extra_path"] = ex.auxiliary_extra.samples.empty() ? "" : base + "_aux2.wav";
  j["transcript"] = ex.target_transcript.ToText();
  j["target_speaker"] = ex.target_speaker_id;
  j["snr_db"] = ex.snr_db;
  j["snrs_db"] = ex.snrs_db;
  j["delays_sec"] = ex.delays_sec;
  j["speed_factor"] = ex.speed_factors.empty() ? 1.0 : ex.speed_factors[0];
  j["speed_factors"] = ex.speed_factors;
  j["volume_factor"] = ex.volume_factor;
  j["utt_ids"] = StringArray(ex.utt_ids);
  j["aux_utt_ids"] = StringArray(ex.aux_utt_ids);
  j["protocol"] = MixProtocolName(ex.protocol);
  json inter = json::array();
  for (size_t k = 0; k < ex.interferers.size(); ++k) {
    const auto &info = ex.interferers[k];
    inter.push_back({{"speaker", info.speaker_id},
                     {"transcript", info.transcript.ToText()},
                     {"utt_id", info.utt_id},
                     {"aux_utt_id", info.aux_utt_id},
                     {"auxiliary_path", base + "_int" + std::to_string(k) + "_aux.wav"}});
  }
  j["interferers"] = inter;
  return j.dump();
}

void WriteCorpus(const Corpus &corpus, const std::string &dir) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "wav", ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create " + dir + ": " + ec.message());
  std::ofstream manifest(fs::path(dir) / "manifest.jsonl");
  if (!manifest) Fail(ErrorKind::kIo, "cannot write manifest in " + dir);
  for (const auto &ex : corpus.examples) {
    std::string line = ManifestLine(ex);
    json j = json::parse(line);
    auto out = [&](const std::string &rel, const Waveform &w) {
      WriteWav((fs::path(dir) / rel).string(), w);
    };
    out(j["mixture_path"], ex.mixture);
    out(j["target_path"], ex.target_in_mixture);
    out(j["auxiliary_path"], ex.auxiliary);
    if (!ex.auxiliary_extra.samples.empty()) out(j["auxiliary_extra_path"], ex.auxiliary_extra);
    for (size_t k = 0; k < ex.interferers.size(); ++k)
      out(j["interferers"][k]["auxiliary_path"], ex.interferers[k].auxiliary);
    manifest << line << '\n';
  }
  if (!manifest) Fail(ErrorKind::kIo, "failed writing manifest in " + dir);
}

std::vector<MixtureExample> LoadManifest(const std::string &path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorKind::kIo, "cannot open manifest " + path);
  fs::path root = fs::path(path).parent_path();
  std::vector<MixtureExample> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string where = path + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception &e) {
      Fail(ErrorKind::kFormat, where + ": " + e.what());
    }
    auto load = [&](const std::string &rel) {
      fs::path p = root / rel;
      if (!fs::exists(p)) Fail(ErrorKind::kIo, where + ": missing audio file " + p.string());
      return ReadWav(p.string());
    };
    try {
      MixtureExample ex;
      ex.example_id = j.value("id", "row" + std::to_string(line_no));
      ex.mixture = load(j.at("mixture_path"));
      ex.auxiliary = load(j.at("auxiliary_path"));
      if (j.contains("target_path")) ex.target_in_mixture = load(j["target_path"]);
      std::string extra = j.value("auxiliary_extra_path", "");
      if (!extra.empty()) ex.auxiliary_extra = load(extra);
      ex.target_transcript = Transcript::FromText(j.at("transcript").get<std::string>());
      ex.target_speaker_id = j.at("target_speaker");
      ex.snr_db = j.value("snr_db", 0.0);
      ex.snrs_db = j.value("snrs_db", std::vector<double>{});
      ex.delays_sec = j.value("delays_sec", std::vector<double>{});
      ex.speed_factors = j.value("speed_factors", std::vector<double>{});
      ex.volume_factor = j.value("volume_factor", 1.0);
      ex.utt_ids = j.value("utt_ids", std::vector<std::string>{});
      ex.aux_utt_ids = j.value("aux_utt_ids", std::vector<std::string>{});
      ex.protocol = ParseMixProtocol(j.value("protocol", "wsj0"));
      for (const auto &ij : j.value("interferers", json::array())) {
        InterfererInfo info;
        info.speaker_id = ij.at("speaker");
        info.transcript = Transcript::FromText(ij.at("transcript").get<std::string>());
        info.utt_id = ij.value("utt_id", "");
        info.aux_utt_id = ij.value("aux_utt_id", "");
        std::string aux = ij.value("auxiliary_path", "");
        if (!aux.empty()) info.auxiliary = load(aux);
        ex.interferers.push_back(std::move(info));
      }
      rows.push_back(std::move(ex));
    } catch (const json::exception &e) {
      Fail(ErrorKind::kFormat, where + ": " + e.what());
    }
  }
  return rows;
}

}  // namespace tsasr
