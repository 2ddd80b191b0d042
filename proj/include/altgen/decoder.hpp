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

// The shared autoregressive language decoder.
//
//   h_0 = E_w[w] + E_p[p]
//   h_l = block(h_{l-1}, terminology features),  l = 1..N
//   P   = softmax(norm(h_N) E_w^T)
//
// E_w is stored once and serves both as the input embedding and, transposed,
// as the output projection.

#pragma once

#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "altgen/layers.hpp"
#include "altgen/vocabulary.hpp"

namespace altgen {

struct DecoderConfig {
  std::size_t vocab_size = 0;
  AttentionHeadConfig heads;
  std::size_t num_blocks = 2;
  std::size_t ffn_dim = 256;
  std::size_t max_len = 64;
  double embed_stddev = 0.02;
};

template <typename T>
class LanguageDecoder {
 public:
  LanguageDecoder() = default;

  static LanguageDecoder create(ParameterStore<T>& store, const std::string& prefix, const DecoderConfig& config,
                                std::mt19937_64& rng);

  const DecoderConfig& config() const { return config_; }
  const Tensor<T>& word_embeddings() const { return word_embed_; }
  const Tensor<T>& position_embeddings() const { return pos_embed_; }

  // Word plus position embedding, one row per id.
  Tensor<T> embed(std::span<const TokenId> ids) const;

  // Next-token logits for every position; row i depends on ids[0..i] only.
  Tensor<T> forward(std::span<const TokenId> ids, const Tensor<T>& term_feats,
                    const ForwardContext<T>& ctx = {}) const;

 private:
  DecoderConfig config_;
  Tensor<T> word_embed_;
  Tensor<T> pos_embed_;
  std::vector<DecoderBlock<T>> blocks_;
  LayerNormParams<T> final_norm_;
};

template <typename T>
struct LmLoss {
  Tensor<T> total;         // summed negative log-likelihood
  std::size_t tokens = 0;  // non-PAD targets

  double mean_per_token() const {
    return tokens == 0 ? 0.0 : static_cast<double>(total.item()) / static_cast<double>(tokens);
  }
};

// Sum of -log P(target_i) over non-PAD targets; logits row i scores targets[i].
template <typename T>
LmLoss<T> lm_loss(const Tensor<T>& logits, std::span<const TokenId> targets);

// Teacher forcing on a complete [BOS ... EOS] sequence.
template <typename T>
LmLoss<T> sequence_loss(const LanguageDecoder<T>& decoder, std::span<const TokenId> sequence,
                        const Tensor<T>& term_feats, const ForwardContext<T>& ctx = {});

enum class DecodeMode { kGreedy, kBeam };

struct DecodeOptions {
  DecodeMode mode = DecodeMode::kGreedy;
  std::size_t beam_width = 4;
  std::size_t max_len = 64;
  bool length_normalize = false;
};

// Logits for the token following `prefix`.
using NextTokenLogits = std::function<std::vector<double>(std::span<const TokenId> prefix)>;

// Starts from [BOS]; stops after EOS or at max_len tokens. Greedy ties go to
// the lowest id; beam ranks by summed log-probability.
std::vector<TokenId> generate(const NextTokenLogits& next, const DecodeOptions& options);

template <typename T>
NextTokenLogits decoder_logits_fn(const LanguageDecoder<T>& decoder, const Tensor<T>& term_feats);

template <typename T>
std::vector<TokenId> generate(const LanguageDecoder<T>& decoder, const Tensor<T>& term_feats,
                              const DecodeOptions& options);

// exp(total NLL / total non-PAD targets) over complete sequences.
template <typename T>
double perplexity(const LanguageDecoder<T>& decoder, std::span<const std::vector<TokenId>> corpus,
                  const std::function<Tensor<T>(std::size_t)>& term_feats_for);

}  // namespace altgen
