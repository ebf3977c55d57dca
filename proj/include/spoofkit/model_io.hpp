// Copyright 2026 The spoofkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPOOFKIT_MODEL_IO_HPP
#define SPOOFKIT_MODEL_IO_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "spoofkit/pooling.hpp"

namespace spoofkit {

// Binary feature-stack file, little-endian:
//   magic "SKFS", uint32 num_layers (= L+1), uint64 frames, uint32 dim,
//   uint32 dtype (4 = float32, 8 = float64), then each layer row-major.
void SaveFeatureStack(const FeatureStack& stack, std::ostream& out);
void SaveFeatureStackFile(const FeatureStack& stack, const std::string& path);
FeatureStack LoadFeatureStack(std::istream& in);
FeatureStack LoadFeatureStackFile(const std::string& path);

// Text checkpoints: a dims header, then one named parameter block per line
// group. When an encoder is present its initial-weight snapshot is stored
// alongside (blocks prefixed "init.") so L2-to-init survives a reload.
struct Checkpoint {
  std::string backend;  // "wa" or "mhfa"
  std::optional<WaModel> wa;
  std::optional<MhfaModel> mhfa;
  std::optional<ToyEncoder> encoder;
  std::optional<ToyEncoder> encoder_init;
};

void SaveCheckpoint(const Checkpoint& ckpt, std::ostream& out);
void SaveCheckpointFile(const Checkpoint& ckpt, const std::string& path);
Checkpoint LoadCheckpoint(std::istream& in);
Checkpoint LoadCheckpointFile(const std::string& path);

}  // namespace spoofkit

#endif  // SPOOFKIT_MODEL_IO_HPP
