// net/checkpoint.h
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

#ifndef TSASR_NET_CHECKPOINT_H_
#define TSASR_NET_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "autodiff/tensor.h"
#include "json.hpp"
#include "net/model.h"

namespace tsasr {

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

// On disk: magic "TSASRCKP", u32 version, config JSON, u64 FNV-1a hash of
// that JSON, u64 step, parameter arrays, optimizer arrays, metadata JSON and
// a trailing zlib crc32 over every preceding byte. Integers and float64
// payloads are little-endian.
struct Checkpoint {
  nlohmann::json config;
  int64_t step = 0;
  std::vector<NamedArray> parameters;
  std::vector<NamedArray> optimizer;
  nlohmann::json metadata = nlohmann::json::object();
};

constexpr uint32_t kCheckpointVersion = 1;

uint64_t ConfigHash(const nlohmann::json &config);

// Written to a temporary file and renamed into place.
void SaveCheckpoint(const Checkpoint &ckpt, const std::string &path);
// Throws kIo when unreadable and kFormat on a bad magic, version, hash or
// checksum.
Checkpoint LoadCheckpoint(const std::string &path);

// Copies every model parameter; config["model"] holds the model config.
Checkpoint SnapshotModel(const TsAsrModel &model);
// Requires the exact parameter names and shapes of `model`.
void RestoreParameters(const Checkpoint &ckpt, TsAsrModel *model);
ModelConfig CheckpointModelConfig(const Checkpoint &ckpt);

}  // namespace tsasr

#endif  // TSASR_NET_CHECKPOINT_H_
