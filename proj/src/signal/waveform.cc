// signal/waveform.cc
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

#include "signal/waveform.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "base/tsasr-error.h"

namespace tsasr {

double Waveform::Power() const {
  if (samples.empty()) return 0.0;
  double s = 0.0;
  for (double x : samples) s += x * x;
  return s / static_cast<double>(samples.size());
}

void Waveform::Validate(const char *what) const {
  if (samples.empty()) Fail(ErrorKind::kDegenerateSignal, std::string(what) + " is empty");
  for (double x : samples)
    if (!std::isfinite(x))
      Fail(ErrorKind::kDegenerateSignal, std::string(what) + " has non-finite samples");
}

Waveform Pad(const Waveform &w, int64_t front, int64_t back) {
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(front + w.size() + back, 0.0);
  std::copy(w.samples.begin(), w.samples.end(), out.samples.begin() + front);
  return out;
}

Waveform ScaleWaveform(const Waveform &w, double factor) {
  Waveform out = w;
  for (double &x : out.samples) x *= factor;
  return out;
}

Waveform SumWaveforms(const std::vector<Waveform> &parts) {
  Waveform out;
  if (parts.empty()) return out;
  out.sample_rate = parts[0].sample_rate;
  int64_t n = 0;
  for (const auto &p : parts) n = std::max(n, p.size());
  out.samples.assign(n, 0.0);
  for (const auto &p : parts)
    for (int64_t i = 0; i < p.size(); ++i) out.samples[i] += p.samples[i];
  return out;
}

Waveform ConcatWaveforms(const std::vector<Waveform> &parts) {
  Waveform out;
  if (!parts.empty()) out.sample_rate = parts[0].sample_rate;
  for (const auto &p : parts) out.samples.insert(out.samples.end(), p.samples.begin(), p.samples.end());
  return out;
}

namespace {

void PutU32(std::string *s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void PutU16(std::string *s, uint16_t v) {
  s->push_back(static_cast<char>(v & 0xff));
  s->push_back(static_cast<char>(v >> 8));
}
uint32_t GetU32(const unsigned char *p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t GetU16(const unsigned char *p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

}  // namespace

void WriteWav(const std::string &path, const Waveform &w, WavFormat format) {
  bool is_float = format == WavFormat::kFloat32;
  uint16_t bits = is_float ? 32 : 16;
  uint32_t data_bytes = static_cast<uint32_t>(w.size()) * bits / 8;
  std::string buf;
  buf.reserve(44 + data_bytes);
  buf += "RIFF";
  PutU32(&buf, 36 + data_bytes);
  buf += "WAVEfmt ";
  PutU32(&buf, 16);
  PutU16(&buf, is_float ? 3 : 1);
  PutU16(&buf, 1);
  PutU32(&buf, w.sample_rate);
  PutU32(&buf, w.sample_rate * bits / 8);
  PutU16(&buf, bits / 8);
  PutU16(&buf, bits);
  buf += "data";
  PutU32(&buf, data_bytes);
  for (double x : w.samples) {
    if (is_float) {
      float f = static_cast<float>(x);
      uint32_t u;
      std::memcpy(&u, &f, 4);
      PutU32(&buf, u);
    } else {
      long c = std::clamp(std::lround(x * 32768.0), -32768L, 32767L);
      PutU16(&buf, static_cast<uint16_t>(static_cast<int16_t>(c)));
    }
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorKind::kIo, "cannot open " + path + " for writing");
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) Fail(ErrorKind::kIo, "failed writing " + path);
}

Waveform ReadWav(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIo, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    Fail(ErrorKind::kFormat, path + " is not a RIFF/WAVE file");
  size_t pos = 12;
  int format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  Waveform out;
  bool have_fmt = false;
  while (pos + 8 <= bytes.size()) {
    uint32_t len = GetU32(&bytes[pos + 4]);
    const unsigned char *body = &bytes[pos + 8];
    if (pos + 8 + len > bytes.size()) Fail(ErrorKind::kFormat, path + ": truncated chunk");
    if (std::memcmp(&bytes[pos], "fmt ", 4) == 0) {
      format = GetU16(body);
      channels = GetU16(body + 2);
      rate = GetU32(body + 4);
      bits = GetU16(body + 14);
      have_fmt = true;
    } else if (std::memcmp(&bytes[pos], "data", 4) == 0) {
      if (!have_fmt) Fail(ErrorKind::kFormat, path + ": data chunk before fmt chunk");
      if (channels != 1) Fail(ErrorKind::kFormat, path + ": only mono audio is supported");
      out.sample_rate = static_cast<int>(rate);
      if (format == 3 && bits == 32) {
        for (uint32_t i = 0; i + 4 <= len; i += 4) {
          uint32_t u = GetU32(body + i);
          float f;
          std::memcpy(&f, &u, 4);
          out.samples.push_back(f);
        }
      } else if (format == 1 && bits == 16) {
        for (uint32_t i = 0; i + 2 <= len; i += 2)
          out.samples.push_back(static_cast<int16_t>(GetU16(body + i)) / 32768.0);
      } else {
        Fail(ErrorKind::kFormat, path + ": unsupported sample format");
      }
      return out;
    }
    pos += 8 + len + (len & 1);
  }
  Fail(ErrorKind::kFormat, path + ": no data chunk");
}

}  // namespace tsasr
