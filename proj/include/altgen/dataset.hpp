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


// Tokenized dataset splits and their "AGDS" container files.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "altgen/grammar.hpp"
#include "altgen/patch_embed.hpp"
#include "altgen/vocabulary.hpp"

namespace altgen {

struct Sample {
  std::uint64_t id = 0;
  SampleKind kind = SampleKind::kTransfer;
  bool has_image = false;
  ImageGrid image;
  std::vector<std::uint8_t> labels;
  std::vector<TokenId> tokens;  // [BOS ... EOS]
};

struct Dataset {
  static constexpr std::uint32_t kVersion = 1;

  std::string split;
  std::string vocab_fingerprint;
  std::vector<std::string> terminology_names;
  std::uint64_t grammar_seed = 0;
  std::string grammar_hash;
  std::size_t grid_height = 0;
  std::size_t grid_width = 0;
  std::size_t channels = 0;
  std::vector<Sample> samples;

  std::size_t num_terms() const { return terminology_names.size(); }
  // IntegrityError(kCorrupt) on label length, token range, or image shape
  // violations.
  void validate(std::size_t vocab_size) const;
};

Dataset tokenize_split(const std::string& split, std::span<const RawSample> raw, const Vocabulary& vocab,
                       const SyntheticGrammar& grammar);

std::string serialize_dataset(const Dataset& ds);
Dataset parse_dataset(std::string_view bytes);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

// One JSON object per sample with its decoded text, for inspection.
std::string dataset_sidecar(const Dataset& ds, const Vocabulary& vocab);

struct DatasetSummary {
  std::size_t samples = 0;
  std::size_t tokens = 0;
  std::size_t unknown_tokens = 0;
  std::vector<double> label_prevalence;

  double unk_rate() const { return tokens == 0 ? 0.0 : static_cast<double>(unknown_tokens) / tokens; }
};

DatasetSummary summarize(const Dataset& ds);

}  // namespace altgen
