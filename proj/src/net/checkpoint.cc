// net/checkpoint.cc
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

#include "net/checkpoint.h"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "base/tsasr-error.h"

namespace tsasr {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'T', 'S', 'A', 'S', 'R', 'C', 'K', 'P'};

class Writer {
 public:
  template <class T>
  void Pod(T v) {
    const char *p = reinterpret_cast<const char *>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  void Bytes(const void *data, size_t n) {
    const char *p = static_cast<const char *>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  void String(const std::string &s) {
    Pod<uint64_t>(s.size());
    Bytes(s.data(), s.size());
  }
  void Arrays(const std::vector<NamedArray> &arrays) {
    Pod<uint32_t>(arrays.size());
    for (const auto &a : arrays) {
      String(a.name);
      Pod<uint32_t>(a.shape.size());
      for (int d : a.shape) Pod<int32_t>(d);
      Pod<uint64_t>(a.values.size());
      Bytes(a.values.data(), a.values.size() * sizeof(double));
    }
  }
  std::vector<char> &buf() { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(const std::vector<char> &buf, size_t end, std::string path)
      : buf_(buf), end_(end), path_(std::move(path)) {}
  void Need(size_t n) {
    if (pos_ + n > end_) Fail(ErrorKind::kFormat, path_ + ": truncated checkpoint");
  }
  template <class T>
  T Pod() {
    Need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string String() {
    uint64_t n = Pod<uint64_t>();
    Need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<NamedArray> Arrays() {
    uint32_t count = Pod<uint32_t>();
    std::vector<NamedArray> out(count);
    for (auto &a : out) {
      a.name = String();
      uint32_t rank = Pod<uint32_t>();
      for (uint32_t i = 0; i < rank; ++i) a.shape.push_back(Pod<int32_t>());
      uint64_t n = Pod<uint64_t>();
      if (static_cast<int64_t>(n) != NumElements(a.shape))
        Fail(ErrorKind::kFormat, path_ + ": array " + a.name + " size does not match its shape");
      Need(n * sizeof(double));
      a.values.resize(n);
      std::memcpy(a.values.data(), buf_.data() + pos_, n * sizeof(double));
      pos_ += n * sizeof(double);
    }
    return out;
  }
  size_t pos() const { return pos_; }

 private:
  const std::vector<char> &buf_;
  size_t pos_ = 0, end_;
  std::string path_;
};

uint32_t Crc(const char *data, size_t n) {
  return static_cast<uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), reinterpret_cast<const Bytef *>(data), static_cast<uInt>(n)));
}

}  // namespace

uint64_t ConfigHash(const nlohmann::json &config) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void SaveCheckpoint(const Checkpoint &ckpt, const std::string &path) {
  Writer w;
  w.Bytes(kMagic, sizeof(kMagic));
  w.Pod<uint32_t>(kCheckpointVersion);
  w.String(ckpt.config.dump());
  w.Pod<uint64_t>(ConfigHash(ckpt.config));
  w.Pod<int64_t>(ckpt.step);
  w.Arrays(ckpt.parameters);
  w.Arrays(ckpt.optimizer);
  w.String(ckpt.metadata.dump());
  w.Pod<uint32_t>(Crc(w.buf().data(), w.buf().size()));

  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) Fail(ErrorKind::kIo, "cannot write " + tmp);
    os.write(w.buf().data(), static_cast<std::streamsize>(w.buf().size()));
    if (!os) Fail(ErrorKind::kIo, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot rename " + tmp + " to " + path + ": " + ec.message());
}

Checkpoint LoadCheckpoint(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIo, "cannot open checkpoint " + path);
  std::vector<char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) + 8 || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    Fail(ErrorKind::kFormat, path + ": not a checkpoint (bad magic)");
  uint32_t stored_crc;
  std::memcpy(&stored_crc, buf.data() + buf.size() - 4, 4);
  if (stored_crc != Crc(buf.data(), buf.size() - 4))
    Fail(ErrorKind::kFormat, path + ": checksum mismatch");
  Reader r(buf, buf.size() - 4, path);
  r.Need(sizeof(kMagic));
  for (size_t i = 0; i < sizeof(kMagic); ++i) r.Pod<char>();
  uint32_t version = r.Pod<uint32_t>();
  if (version != kCheckpointVersion)
    Fail(ErrorKind::kFormat, path + ": unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  try {
    ckpt.config = nlohmann::json::parse(r.String());
    uint64_t hash = r.Pod<uint64_t>();
    if (hash != ConfigHash(ckpt.config)) Fail(ErrorKind::kFormat, path + ": config hash mismatch");
    ckpt.step = r.Pod<int64_t>();
    ckpt.parameters = r.Arrays();
    ckpt.optimizer = r.Arrays();
    ckpt.metadata = nlohmann::json::parse(r.String());
  } catch (const nlohmann::json::exception &e) {
    Fail(ErrorKind::kFormat, path + ": " + e.what());
  }
  if (r.pos() != buf.size() - 4) Fail(ErrorKind::kFormat, path + ": trailing bytes");
  return ckpt;
}

Checkpoint SnapshotModel(const TsAsrModel &model) {
  Checkpoint ckpt;
  ckpt.config = {{"model", model.config().ToJson()}};
  for (const auto &p : model.parameters().all())
    ckpt.parameters.push_back(
        {p.name, p.shape, std::vector<double>(p.tensor.values().begin(), p.tensor.values().end())});
  return ckpt;
}

void RestoreParameters(const Checkpoint &ckpt, TsAsrModel *model) {
  auto &params = model->parameters().all();
  if (ckpt.parameters.size() != params.size())
    Fail(ErrorKind::kFormat, "checkpoint has " + std::to_string(ckpt.parameters.size()) +
                                 " parameters, model has " + std::to_string(params.size()));
  for (size_t i = 0; i < params.size(); ++i) {
    const auto &src = ckpt.parameters[i];
    auto &dst = params[i];
    if (src.name != dst.name || src.shape != dst.shape)
      Fail(ErrorKind::kFormat, "checkpoint parameter " + src.name + " " +
                                   ShapeToString(src.shape) + " does not match model " + dst.name +
                                   " " + ShapeToString(dst.shape));
    std::copy(src.values.begin(), src.values.end(), dst.tensor.mutable_values().begin());
  }
}

ModelConfig CheckpointModelConfig(const Checkpoint &ckpt) {
  if (!ckpt.config.contains("model")) Fail(ErrorKind::kFormat, "checkpoint lacks a model config");
  return ModelConfig::FromJson(ckpt.config.at("model"));
}

}  // namespace tsasr
