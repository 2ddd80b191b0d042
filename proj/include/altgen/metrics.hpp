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


// Caption metrics: corpus BLEU-1..4, ROUGE-L and CIDEr-D over pre-tokenized
// text.

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace altgen {

using Tokens = std::vector<std::string>;

struct EvalPair {
  std::string id;
  Tokens candidate;
  std::vector<Tokens> references;
};

using NGramCounts = std::map<Tokens, std::size_t>;

// Every contiguous n-gram of `tokens` with its multiplicity.
NGramCounts ngram_counts(const Tokens& tokens, std::size_t n);

struct BleuOptions {
  std::size_t max_n = 4;
  // When positive, a zero n-gram match count is replaced by this value so
  // that logged scores stay informative early in training.
  double epsilon = 0.0;
};

struct BleuResult {
  std::vector<double> scores;      // BLEU-1..max_n
  std::vector<double> precisions;  // clipped n-gram precision per order
  double brevity_penalty = 0.0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  std::string warning;  // set when every candidate is empty
};

BleuResult bleu(std::span<const EvalPair> corpus, const BleuOptions& options = {});

// LCS-based F-measure with recall weighted by beta, best over references.
double rouge_l_pair(const Tokens& candidate, std::span<const Tokens> references, double beta = 1.2);
double rouge_l(std::span<const EvalPair> corpus, double beta = 1.2);

// Per-pair CIDEr-D with document frequencies taken over the references of
// the whole corpus.
std::vector<double> cider_d_scores(std::span<const EvalPair> corpus, double sigma = 6.0);
double cider_d(std::span<const EvalPair> corpus, double sigma = 6.0);

struct CaptionMetrics {
  std::vector<double> bleu;  // BLEU-1..4
  double rouge_l = 0.0;
  double cider_d = 0.0;
};

CaptionMetrics caption_metrics(std::span<const EvalPair> corpus);

}  // namespace altgen
