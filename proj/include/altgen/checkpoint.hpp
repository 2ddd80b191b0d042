// Copyright 2026 The altgen Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// "AGCK" checkpoint files: model hyperparameters, every parameter tensor,
// the optimizer moments and the trainer's resumable state.
//
// Header (JSON): model config, trainer state, optimizer settings, provenance.
// Payload, little-endian:
//   per parameter: name (u32 length + bytes) | rank u32 | dims u32... | f32 values
//   per optimizer entry: name | updates u64 | rank u32 | dims u32... |
//                        f32 first moments | f32 second moments

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "altgen/adam.hpp"
#include "altgen/model.hpp"
#include "json.hpp"

namespace altgen {

struct TensorRecord {
  Shape shape;
  std::vector<float> values;
};

struct CheckpointContents {
  static constexpr std::uint32_t kVersion = 1;

  ModelConfig model;
  nlohmann::ordered_json trainer_state = nlohmann::ordered_json::object();
  nlohmann::ordered_json provenance = nlohmann::ordered_json::object();
  AdamState<float> optimizer;
  std::vector<std::pair<std::string, TensorRecord>> parameters;  // store order
};

CheckpointContents capture_checkpoint(const Model<float>& model, const AdamState<float>& optimizer,
                                      nlohmann::ordered_json trainer_state, nlohmann::ordered_json provenance);

std::string serialize_checkpoint(const CheckpointContents& ck);
CheckpointContents parse_checkpoint(std::string_view bytes);
void save_checkpoint(const std::filesystem::path& path, const CheckpointContents& ck);
CheckpointContents load_checkpoint(const std::filesystem::path& path);

// Copies parameter values and optimizer moments into `model` / `optimizer`.
// Everything is checked first (names, shapes, model config); on any mismatch
// an IntegrityError(kShapeMismatch) is thrown and nothing is modified.
void restore_checkpoint(const CheckpointContents& ck, Model<float>& model, AdamState<float>* optimizer);

// Builds a fresh model with the checkpoint's config and values.
Model<float> model_from_checkpoint(const CheckpointContents& ck);

}  // namespace altgen
