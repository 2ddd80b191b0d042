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


// The full model: terminology encoder (both branches, shared terminology
// table and classifier head) feeding the shared language decoder.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "altgen/dataset.hpp"
#include "altgen/decoder.hpp"
#include "altgen/terminology_encoder.hpp"
#include "json.hpp"

namespace altgen {

struct ModelConfig {
  std::size_t model_dim = 64;
  std::size_t num_heads = 8;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t ffn_dim = 256;
  std::size_t term_dim = 64;
  std::size_t visual_dim = 32;
  std::size_t text_dim = 64;
  std::size_t max_len = 64;
  double embed_stddev = 0.02;

  // Filled from the data.
  std::size_t vocab_size = 0;
  std::vector<std::string> terminology_names;
  std::size_t grid_height = 7;
  std::size_t grid_width = 7;
  std::size_t grid_channels = 4;

  nlohmann::ordered_json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  void validate() const;
};

// Names shared by both procedures: everything a textbook pass and an image
// pass both touch.
bool is_shared_parameter(const std::string& name);
bool is_visual_parameter(const std::string& name);
bool is_textual_parameter(const std::string& name);
bool is_patch_parameter(const std::string& name);

template <typename T>
struct SampleForward {
  Tensor<T> class_logits;  // N_m x 1
  Tensor<T> class_loss;    // mean BCE over terminologies
  LmLoss<T> lm;            // summed NLL over report tokens
  Tensor<T> term_feats;
};

template <typename T>
class Model {
 public:
  static Model create(const ModelConfig& config, std::uint64_t seed);

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const ModelConfig& config() const { return config_; }
  ParameterStore<T>& parameters() { return store_; }
  const ParameterStore<T>& parameters() const { return store_; }
  const TerminologyEncoder<T>& encoder() const { return encoder_; }
  const LanguageDecoder<T>& decoder() const { return decoder_; }

  // Visual branch for samples with an image, textual branch otherwise.
  UnifiedFeatures<T> unified(const Sample& sample, const Vocabulary* vocab = nullptr) const;
  EncoderOutput<T> encode(const Sample& sample, const ForwardContext<T>& ctx = {}) const;

  SampleForward<T> forward(const Sample& sample, const ForwardContext<T>& ctx = {}) const;

  std::vector<TokenId> generate(const Sample& sample, const DecodeOptions& options) const;
  // Sigmoid probabilities per terminology.
  std::vector<double> classify(const Sample& sample) const;

 private:
  Model() = default;

  ModelConfig config_;
  ParameterStore<T> store_;
  TerminologyEncoder<T> encoder_;
  LanguageDecoder<T> decoder_;
};

}  // namespace altgen
