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


// Synthetic report grammar: a terminology inventory where every term owns
// visual patterns (a grid cell plus a channel signature) and sentence
// templates, and a generator producing image-report and textbook corpora.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "altgen/patch_embed.hpp"

namespace altgen {

struct VisualPattern {
  std::size_t row = 0;
  std::size_t col = 0;
  std::vector<float> signature;  // one value per channel
};

struct TemplateChoice {
  std::string text;  // contains "{term}" exactly once
  double weight = 1.0;
};

struct TerminologySpec {
  std::string name;
  std::vector<VisualPattern> patterns;
};

struct SyntheticGrammar {
  std::string name;
  std::uint64_t seed = 0;
  std::size_t grid_height = 7;
  std::size_t grid_width = 7;
  std::size_t channels = 4;
  double noise_stddev = 0.08;
  double distractor_prob = 0.3;     // per unassigned cell
  double distractor_amplitude = 0.6;
  double normal_prob = 0.2;         // empty terminology subset
  std::size_t max_findings = 3;
  std::vector<TerminologySpec> terms;
  std::vector<TemplateChoice> report_templates;
  std::vector<TemplateChoice> textbook_templates;  // used together with report_templates
  std::vector<std::string> normal_sentences;       // appended to every report
  std::string clear_sentence;                      // only when nothing is found

  std::size_t num_terms() const { return terms.size(); }
  std::vector<std::string> terminology_names() const;

  // Throws ConfigError when a term lacks a pattern or there are fewer than
  // two templates, patterns collide or leave the grid, or a template names a
  // term other than its placeholder.
  void validate() const;

  std::string to_json() const;
  static SyntheticGrammar from_json(std::string_view text);
  static SyntheticGrammar load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  // SHA-256 of to_json().
  std::string hash() const;
};

// Default grammar with N_m terms. `variant` 0 leans on the first report
// template, 1 on the second; both share lexicon and patterns.
SyntheticGrammar default_grammar(std::size_t num_terms, std::uint64_t seed, int variant);

enum class SampleKind : std::uint8_t { kPretrain = 0, kTransfer = 1 };

struct RawSample {
  std::uint64_t id = 0;
  SampleKind kind = SampleKind::kTransfer;
  std::vector<std::uint8_t> labels;
  ImageGrid image;  // empty for textbook documents
  std::string text;
};

struct CorpusSizes {
  std::size_t textbook = 500;
  std::size_t train = 2000;
  std::size_t val = 200;
  std::size_t test = 200;
};

struct RawCorpus {
  std::vector<RawSample> textbook, train, val, test;
};

// Deterministic in grammar.seed. Sample ids are unique across all splits,
// starting at `first_id`.
RawCorpus generate_corpus(const SyntheticGrammar& grammar, const CorpusSizes& sizes, std::uint64_t first_id = 0);

// Terms whose names appear in `text`, as a label vector.
std::vector<std::uint8_t> mentioned_terms(const SyntheticGrammar& grammar, std::string_view text);

// Reads the planted patterns back from the grid: term i is present when some
// pattern's cell projects onto its signature with coefficient above 0.5.
std::vector<std::uint8_t> oracle_classify(const SyntheticGrammar& grammar, const ImageGrid& image);

}  // namespace altgen
