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


// Brute-force reference implementations of the caption metrics, written
// independently of src/metrics.cpp: n-grams are joined strings, LCS is found
// by enumerating candidate subsequences.

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "altgen/metrics.hpp"

namespace altgen::oracle {

inline std::unordered_map<std::string, int> grams(const Tokens& t, std::size_t n) {
  std::unordered_map<std::string, int> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) {
    std::string key;
    for (std::size_t j = i; j < i + n; ++j) key += t[j] + '\x1f';
    ++out[key];
  }
  return out;
}

// Corpus BLEU-1..4 with clipped counts, closest reference length (shorter on
// ties) and no smoothing.
inline std::vector<double> bleu(const std::vector<EvalPair>& corpus) {
  double hits[4] = {0, 0, 0, 0}, counts[4] = {0, 0, 0, 0};
  double c = 0, r = 0;
  for (const auto& p : corpus) {
    c += static_cast<double>(p.candidate.size());
    std::vector<std::size_t> lens;
    for (const auto& ref : p.references) lens.push_back(ref.size());
    std::sort(lens.begin(), lens.end());
    std::size_t best = lens[0];
    for (std::size_t len : lens) {
      const long d = std::labs(static_cast<long>(len) - static_cast<long>(p.candidate.size()));
      const long bd = std::labs(static_cast<long>(best) - static_cast<long>(p.candidate.size()));
      if (d < bd) best = len;
    }
    r += static_cast<double>(best);
    for (std::size_t n = 1; n <= 4; ++n) {
      for (const auto& [g, k] : grams(p.candidate, n)) {
        int clip = 0;
        for (const auto& ref : p.references) {
          const auto rg = grams(ref, n);
          const auto it = rg.find(g);
          if (it != rg.end()) clip = std::max(clip, it->second);
        }
        hits[n - 1] += std::min(k, clip);
        counts[n - 1] += k;
      }
    }
  }
  std::vector<double> out(4, 0.0);
  if (c == 0) return out;
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  for (std::size_t n = 1; n <= 4; ++n) {
    double log_sum = 0;
    bool zero = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (hits[k] == 0) zero = true;
      else log_sum += std::log(hits[k] / counts[k]);
    }
    out[n - 1] = zero ? 0.0 : bp * std::exp(log_sum / static_cast<double>(n));
  }
  return out;
}

inline bool is_subsequence(const Tokens& sub, const Tokens& seq) {
  std::size_t j = 0;
  for (const auto& t : seq) {
    if (j < sub.size() && sub[j] == t) ++j;
  }
  return j == sub.size();
}

// Longest common subsequence by trying every subset of the candidate.
inline std::size_t brute_lcs(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  const std::size_t n = a.size();
  for (unsigned long mask = 0; mask < (1ul << n); ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1ul << i)) sub.push_back(a[i]);
    }
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

inline double rouge_l(const std::vector<EvalPair>& corpus, double beta = 1.2) {
  double total = 0;
  for (const auto& p : corpus) {
    double best = 0;
    for (const auto& ref : p.references) {
      const double l = static_cast<double>(brute_lcs(p.candidate, ref));
      if (l == 0) continue;
      const double prec = l / static_cast<double>(p.candidate.size());
      const double rec = l / static_cast<double>(ref.size());
      best = std::max(best, (1 + beta * beta) * prec * rec / (rec + beta * beta * prec));
    }
    total += best;
  }
  return total / static_cast<double>(corpus.size());
}

// CIDEr-D: tf-idf n-gram vectors with document frequencies counted over the
// reference sets, clipped dot product, Gaussian length penalty, times 10.
inline std::vector<double> cider_d(const std::vector<EvalPair>& corpus, double sigma = 6.0) {
  std::unordered_map<std::string, double> df;
  for (const auto& p : corpus) {
    std::unordered_set<std::string> seen;
    for (const auto& ref : p.references)
      for (std::size_t n = 1; n <= 4; ++n)
        for (const auto& [g, k] : grams(ref, n)) seen.insert(std::to_string(n) + g);
    for (const auto& g : seen) df[g] += 1;
  }
  const double big_n = static_cast<double>(corpus.size());
  auto weights = [&](const Tokens& t, std::size_t n) {
    std::unordered_map<std::string, double> w;
    for (const auto& [g, k] : grams(t, n)) {
      const auto it = df.find(std::to_string(n) + g);
      const double d = it == df.end() ? 1.0 : std::max(1.0, it->second);
      w[g] = k * std::log(big_n / d);
    }
    return w;
  };
  auto norm = [](const std::unordered_map<std::string, double>& w) {
    double s = 0;
    for (const auto& [g, v] : w) s += v * v;
    return std::sqrt(s);
  };
  std::vector<double> out;
  for (const auto& p : corpus) {
    double score = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto hw = weights(p.candidate, n);
      double per_ref = 0;
      for (const auto& ref : p.references) {
        const auto rw = weights(ref, n);
        double dot = 0;
        for (const auto& [g, v] : hw) {
          if (rw.count(g)) dot += std::min(v, rw.at(g)) * rw.at(g);
        }
        const double nh = norm(hw), nr = norm(rw);
        const double delta = static_cast<double>(p.candidate.size()) - static_cast<double>(ref.size());
        if (nh > 0 && nr > 0) per_ref += dot / (nh * nr) * std::exp(-delta * delta / (2 * sigma * sigma));
      }
      score += per_ref / static_cast<double>(p.references.size());
    }
    out.push_back(score / 4 * 10);
  }
  return out;
}

// Random mini-corpus over a five-word lexicon: 3-6 pairs, 1-3 references,
// sentences of 0-9 tokens.
inline std::vector<EvalPair> random_corpus(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> lex{"the", "lung", "is", "clear", "."};
  auto sentence = [&](std::size_t min_len) {
    std::uniform_int_distribution<std::size_t> len(min_len, 9), word(0, lex.size() - 1);
    Tokens t(len(rng));
    for (auto& w : t) w = lex[word(rng)];
    return t;
  };
  std::uniform_int_distribution<int> pairs(3, 6), refs(1, 3);
  std::vector<EvalPair> corpus(static_cast<std::size_t>(pairs(rng)));
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    corpus[i].id = std::to_string(i);
    corpus[i].candidate = sentence(0);
    const int k = refs(rng);
    for (int j = 0; j < k; ++j) corpus[i].references.push_back(sentence(1));
  }
  return corpus;
}

}  // namespace altgen::oracle
