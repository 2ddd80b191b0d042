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


#include "altgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>

#include "altgen/errors.hpp"

namespace altgen {

NGramCounts ngram_counts(const Tokens& tokens, std::size_t n) {
  NGramCounts counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

BleuResult bleu(std::span<const EvalPair> corpus, const BleuOptions& options) {
  if (corpus.empty()) throw ContractError("bleu: empty corpus");
  if (options.max_n == 0) throw ContractError("bleu: max_n must be positive");
  std::vector<double> matched(options.max_n, 0.0), total(options.max_n, 0.0);
  BleuResult out;
  for (const auto& pair : corpus) {
    if (pair.references.empty()) throw ContractError("bleu: pair '" + pair.id + "' has no reference");
    const std::size_t c = pair.candidate.size();
    out.candidate_length += c;
    std::size_t best = pair.references.front().size();
    for (const auto& ref : pair.references) {
      const auto diff = [c](std::size_t r) { return r > c ? r - c : c - r; };
      if (diff(ref.size()) < diff(best) || (diff(ref.size()) == diff(best) && ref.size() < best)) best = ref.size();
    }
    out.reference_length += best;
    for (std::size_t n = 1; n <= options.max_n; ++n) {
      const NGramCounts cand = ngram_counts(pair.candidate, n);
      NGramCounts max_ref;
      for (const auto& ref : pair.references) {
        for (const auto& [g, k] : ngram_counts(ref, n)) max_ref[g] = std::max(max_ref[g], k);
      }
      for (const auto& [g, k] : cand) {
        const auto it = max_ref.find(g);
        matched[n - 1] += static_cast<double>(std::min(k, it == max_ref.end() ? 0 : it->second));
        total[n - 1] += static_cast<double>(k);
      }
    }
  }
  out.scores.assign(options.max_n, 0.0);
  out.precisions.assign(options.max_n, 0.0);
  if (out.candidate_length == 0) {
    out.warning = "every candidate is empty; BLEU is 0";
    return out;
  }
  const double c = static_cast<double>(out.candidate_length);
  const double r = static_cast<double>(out.reference_length);
  out.brevity_penalty = std::exp(std::min(0.0, 1.0 - r / c));
  double log_sum = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < options.max_n; ++n) {
    double p = total[n] > 0 ? matched[n] / total[n] : 0.0;
    if (matched[n] == 0 && options.epsilon > 0) p = options.epsilon / std::max(total[n], 1.0);
    out.precisions[n] = p;
    if (p <= 0) zero = true;
    if (!zero) log_sum += std::log(p);
    out.scores[n] = zero ? 0.0 : out.brevity_penalty * std::exp(log_sum / static_cast<double>(n + 1));
  }
  return out;
}

namespace {

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double rouge_l_pair(const Tokens& candidate, std::span<const Tokens> references, double beta) {
  if (references.empty()) throw ContractError("rouge_l: pair has no reference");
  double best = 0.0;
  if (candidate.empty()) return best;
  for (const auto& ref : references) {
    if (ref.empty()) continue;
    const double lcs = static_cast<double>(lcs_length(candidate, ref));
    if (lcs == 0) continue;
    const double p = lcs / static_cast<double>(candidate.size());
    const double r = lcs / static_cast<double>(ref.size());
    const double b2 = beta * beta;
    best = std::max(best, (1 + b2) * p * r / (r + b2 * p));
  }
  return best;
}

double rouge_l(std::span<const EvalPair> corpus, double beta) {
  if (corpus.empty()) throw ContractError("rouge_l: empty corpus");
  double total = 0.0;
  for (const auto& pair : corpus) total += rouge_l_pair(pair.candidate, pair.references, beta);
  return total / static_cast<double>(corpus.size());
}

namespace {

constexpr std::size_t kCiderOrders = 4;

struct TfIdf {
  std::vector<std::map<Tokens, double>> vec;  // per order
  std::vector<double> norm;
  double length = 0;
};

TfIdf tf_idf(const Tokens& tokens, const std::map<Tokens, double>& df, double log_docs) {
  TfIdf out;
  out.vec.resize(kCiderOrders);
  out.norm.assign(kCiderOrders, 0.0);
  out.length = static_cast<double>(tokens.size());
  for (std::size_t n = 1; n <= kCiderOrders; ++n) {
    for (const auto& [g, tf] : ngram_counts(tokens, n)) {
      const auto it = df.find(g);
      const double freq = it == df.end() ? 0.0 : it->second;
      const double w = static_cast<double>(tf) * (log_docs - std::log(std::max(1.0, freq)));
      out.vec[n - 1][g] = w;
      out.norm[n - 1] += w * w;
    }
    out.norm[n - 1] = std::sqrt(out.norm[n - 1]);
  }
  return out;
}

}  // namespace

std::vector<double> cider_d_scores(std::span<const EvalPair> corpus, double sigma) {
  if (corpus.empty()) throw ContractError("cider_d: empty corpus");
  std::map<Tokens, double> df;
  for (const auto& pair : corpus) {
    if (pair.references.empty()) throw ContractError("cider_d: pair '" + pair.id + "' has no reference");
    std::set<Tokens> seen;
    for (const auto& ref : pair.references) {
      for (std::size_t n = 1; n <= kCiderOrders; ++n) {
        for (const auto& [g, k] : ngram_counts(ref, n)) seen.insert(g);
      }
    }
    for (const auto& g : seen) df[g] += 1.0;
  }
  const double log_docs = std::log(static_cast<double>(corpus.size()));
  std::vector<double> scores;
  for (const auto& pair : corpus) {
    const TfIdf hyp = tf_idf(pair.candidate, df, log_docs);
    std::vector<double> per_order(kCiderOrders, 0.0);
    for (const auto& ref_tokens : pair.references) {
      const TfIdf ref = tf_idf(ref_tokens, df, log_docs);
      const double delta = hyp.length - ref.length;
      const double penalty = std::exp(-(delta * delta) / (2 * sigma * sigma));
      for (std::size_t n = 0; n < kCiderOrders; ++n) {
        double dot = 0.0;
        for (const auto& [g, w] : hyp.vec[n]) {
          const auto it = ref.vec[n].find(g);
          if (it != ref.vec[n].end()) dot += std::min(w, it->second) * it->second;
        }
        if (hyp.norm[n] != 0 && ref.norm[n] != 0) {
          per_order[n] += dot / (hyp.norm[n] * ref.norm[n]) * penalty;
        }
      }
    }
    double mean = 0.0;
    for (double v : per_order) mean += v / static_cast<double>(pair.references.size());
    scores.push_back(10.0 * mean / static_cast<double>(kCiderOrders));
  }
  return scores;
}

double cider_d(std::span<const EvalPair> corpus, double sigma) {
  const std::vector<double> s = cider_d_scores(corpus, sigma);
  double total = 0.0;
  for (double v : s) total += v;
  return total / static_cast<double>(s.size());
}

CaptionMetrics caption_metrics(std::span<const EvalPair> corpus) {
  CaptionMetrics m;
  m.bleu = bleu(corpus).scores;
  m.rouge_l = rouge_l(corpus);
  m.cider_d = cider_d(corpus);
  return m;
}

}  // namespace altgen
