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


// Model evaluation on a dataset split: generated reports scored with the
// caption metrics, terminology predictions scored with precision/recall/F1.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "altgen/dataset.hpp"
#include "altgen/metrics.hpp"
#include "altgen/model.hpp"
#include "json.hpp"

namespace altgen {

// Micro-averaged over every (sample, terminology) decision.
struct ClassificationCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  double precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
  double recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
  }
  void add(std::span<const double> probabilities, std::span<const std::uint8_t> labels, double threshold = 0.5);
};

struct EvaluationResult {
  CaptionMetrics captions;
  ClassificationCounts classification;
  double class_loss = 0.0;      // mean over samples
  double lm_loss = 0.0;         // mean summed NLL per sample
  double lm_token_loss = 0.0;   // total NLL / scored tokens
  std::vector<EvalPair> pairs;  // candidate vs reference text
};

struct EvaluationOptions {
  DecodeOptions decode;
  double threshold = 0.5;
  bool generate = true;  // false skips report generation and caption metrics
};

template <typename T>
EvaluationResult evaluate_model(const Model<T>& model, const Dataset& data, const Vocabulary& vocab,
                                const EvaluationOptions& options = {});

// Scores the references of a split against themselves.
EvaluationResult evaluate_ground_truth(const Dataset& data, const Vocabulary& vocab);

// One JSON object per line: {"id", "candidate", "references": [...]}.
std::string pairs_to_jsonl(std::span<const EvalPair> pairs);
// Candidate and reference strings are tokenized with split_words.
std::vector<EvalPair> pairs_from_jsonl(std::string_view text);

std::string metrics_table(const CaptionMetrics& captions, const ClassificationCounts* classification);
nlohmann::ordered_json metrics_json(const CaptionMetrics& captions, const ClassificationCounts* classification);

}  // namespace altgen
