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

#include "altgen/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "altgen/errors.hpp"

namespace altgen {

template <typename T>
LanguageDecoder<T> LanguageDecoder<T>::create(ParameterStore<T>& store, const std::string& prefix,
                                              const DecoderConfig& config, std::mt19937_64& rng) {
  if (config.vocab_size == 0) throw ConfigError("decoder vocabulary must not be empty");
  if (config.max_len == 0) throw ConfigError("decoder max_len must be positive");
  config.heads.validate();
  LanguageDecoder d;
  d.config_ = config;
  const std::size_t dim = config.heads.model_dim;
  d.word_embed_ = store.add_normal(prefix + ".word_embed", {config.vocab_size, dim}, config.embed_stddev, rng);
  d.pos_embed_ = store.add_normal(prefix + ".pos_embed", {config.max_len, dim}, config.embed_stddev, rng);
  for (std::size_t l = 0; l < config.num_blocks; ++l) {
    d.blocks_.push_back(
        DecoderBlock<T>::create(store, prefix + ".block" + std::to_string(l), config.heads, config.ffn_dim, rng));
  }
  d.final_norm_ = LayerNormParams<T>::create(store, prefix + ".final_norm", dim);
  return d;
}

template <typename T>
Tensor<T> LanguageDecoder<T>::embed(std::span<const TokenId> ids) const {
  if (ids.empty()) throw ContractError("decoder input is empty");
  if (ids.size() > config_.max_len) {
    throw ContractError("decoder input of " + std::to_string(ids.size()) + " tokens exceeds max_len " +
                        std::to_string(config_.max_len));
  }
  for (TokenId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
      throw ContractError("token id " + std::to_string(id) + " outside vocabulary of " +
                          std::to_string(config_.vocab_size));
    }
  }
  return add(gather_rows(word_embed_, ids), slice_rows(pos_embed_, 0, ids.size()));
}

template <typename T>
Tensor<T> LanguageDecoder<T>::forward(std::span<const TokenId> ids, const Tensor<T>& term_feats,
                                      const ForwardContext<T>& ctx) const {
  if (!term_feats.defined()) throw ContractError("decoder needs terminology features");
  Tensor<T> h = embed(ids);
  const AttentionMask causal = AttentionMask::causal(ids.size());
  ForwardContext<T> inner = ctx;
  inner.recorder = nullptr;
  for (const auto& block : blocks_) h = decoder_block_forward(h, term_feats, block, causal, inner);
  return matmul_nt(final_norm_.apply(h, ctx.ln_eps), word_embed_);
}

template <typename T>
LmLoss<T> lm_loss(const Tensor<T>& logits, std::span<const TokenId> targets) {
  if (logits.rank() != 2 || logits.rows() != targets.size()) {
    throw ContractError("lm_loss: " + std::to_string(targets.size()) + " targets for logits " +
                        shape_string(logits.shape()));
  }
  LmLoss<T> out;
  out.total = cross_entropy_sum(logits, targets, kPad);
  out.tokens = static_cast<std::size_t>(std::count_if(targets.begin(), targets.end(),
                                                      [](TokenId t) { return t != kPad; }));
  return out;
}

template <typename T>
LmLoss<T> sequence_loss(const LanguageDecoder<T>& decoder, std::span<const TokenId> sequence,
                        const Tensor<T>& term_feats, const ForwardContext<T>& ctx) {
  if (sequence.size() < 2) throw ContractError("sequence_loss needs at least two tokens");
  const std::size_t n = sequence.size() - 1;
  return lm_loss(decoder.forward(sequence.first(n), term_feats, ctx), sequence.subspan(1));
}

namespace {

std::vector<double> log_softmax(const std::vector<double>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (double v : logits) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

TokenId argmax_lowest(const std::vector<double>& logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return static_cast<TokenId>(best);
}

struct Hypothesis {
  std::vector<TokenId> tokens;
  double score = 0;
};

double ranking_score(const Hypothesis& h, bool length_normalize) {
  return length_normalize ? h.score / static_cast<double>(h.tokens.size() - 1) : h.score;
}

}  // namespace

std::vector<TokenId> generate(const NextTokenLogits& next, const DecodeOptions& options) {
  if (options.max_len == 0) throw ContractError("generate: max_len must be at least 1");
  if (options.mode == DecodeMode::kGreedy) {
    std::vector<TokenId> seq{kBos};
    while (seq.size() < options.max_len) {
      const std::vector<double> logits = next(seq);
      if (logits.empty()) throw ContractError("generate: empty logits");
      const TokenId tok = argmax_lowest(logits);
      seq.push_back(tok);
      if (tok == kEos) break;
    }
    return seq;
  }

  if (options.beam_width == 0) throw ContractError("generate: beam width must be positive");
  std::vector<Hypothesis> active{{{kBos}, 0.0}};
  std::vector<Hypothesis> finished;
  while (!active.empty()) {
    struct Candidate {
      double score;
      std::size_t hyp;
      TokenId token;
    };
    std::vector<Candidate> candidates;
    std::vector<Hypothesis> next_active;
    for (std::size_t h = 0; h < active.size(); ++h) {
      if (active[h].tokens.size() >= options.max_len) {
        finished.push_back(active[h]);
        continue;
      }
      const std::vector<double> lp = log_softmax(next(active[h].tokens));
      for (std::size_t t = 0; t < lp.size(); ++t) {
        candidates.push_back({active[h].score + lp[t], h, static_cast<TokenId>(t)});
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.hyp != b.hyp) return a.hyp < b.hyp;
      return a.token < b.token;
    });
    const std::size_t keep = std::min(options.beam_width, candidates.size());
    for (std::size_t c = 0; c < keep; ++c) {
      Hypothesis h = active[candidates[c].hyp];
      h.tokens.push_back(candidates[c].token);
      h.score = candidates[c].score;
      if (candidates[c].token == kEos) {
        finished.push_back(std::move(h));
      } else {
        next_active.push_back(std::move(h));
      }
    }
    active = std::move(next_active);
    if (!finished.empty() && !active.empty() && !options.length_normalize) {
      // Summed log-probabilities only decrease, so no active hypothesis can
      // overtake the best finished one.
      double best_finished = -std::numeric_limits<double>::infinity();
      for (const auto& f : finished) best_finished = std::max(best_finished, f.score);
      double best_active = -std::numeric_limits<double>::infinity();
      for (const auto& a : active) best_active = std::max(best_active, a.score);
      if (best_finished >= best_active) break;
    }
  }
  const Hypothesis* best = &finished.front();
  for (const auto& f : finished) {
    if (ranking_score(f, options.length_normalize) > ranking_score(*best, options.length_normalize)) best = &f;
  }
  return best->tokens;
}

template <typename T>
NextTokenLogits decoder_logits_fn(const LanguageDecoder<T>& decoder, const Tensor<T>& term_feats) {
  return [&decoder, term_feats](std::span<const TokenId> prefix) {
    NoGradGuard no_grad;
    Tensor<T> logits = decoder.forward(prefix, term_feats);
    const std::size_t v = logits.cols();
    auto row = logits.values().subspan((prefix.size() - 1) * v, v);
    return std::vector<double>(row.begin(), row.end());
  };
}

template <typename T>
std::vector<TokenId> generate(const LanguageDecoder<T>& decoder, const Tensor<T>& term_feats,
                              const DecodeOptions& options) {
  DecodeOptions capped = options;
  capped.max_len = std::min(options.max_len, decoder.config().max_len);
  return generate(decoder_logits_fn(decoder, term_feats), capped);
}

template <typename T>
double perplexity(const LanguageDecoder<T>& decoder, std::span<const std::vector<TokenId>> corpus,
                  const std::function<Tensor<T>(std::size_t)>& term_feats_for) {
  if (corpus.empty()) throw ContractError("perplexity of an empty corpus");
  NoGradGuard no_grad;
  double total = 0;
  std::size_t tokens = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    LmLoss<T> l = sequence_loss(decoder, corpus[i], term_feats_for(i));
    total += static_cast<double>(l.total.item());
    tokens += l.tokens;
  }
  if (tokens == 0) throw ContractError("perplexity: corpus has no scored tokens");
  return std::exp(total / static_cast<double>(tokens));
}

#define ALTGEN_INSTANTIATE_DECODER(T)                                                                         \
  template class LanguageDecoder<T>;                                                                          \
  template LmLoss<T> lm_loss<T>(const Tensor<T>&, std::span<const TokenId>);                                  \
  template LmLoss<T> sequence_loss<T>(const LanguageDecoder<T>&, std::span<const TokenId>, const Tensor<T>&,  \
                                      const ForwardContext<T>&);                                              \
  template NextTokenLogits decoder_logits_fn<T>(const LanguageDecoder<T>&, const Tensor<T>&);                 \
  template std::vector<TokenId> generate<T>(const LanguageDecoder<T>&, const Tensor<T>&, const DecodeOptions&); \
  template double perplexity<T>(const LanguageDecoder<T>&, std::span<const std::vector<TokenId>>,             \
                                const std::function<Tensor<T>(std::size_t)>&);

ALTGEN_INSTANTIATE_DECODER(float)
ALTGEN_INSTANTIATE_DECODER(double)

}  // namespace altgen
