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

// Attention, feed-forward, encoder layer and decoder block.
//
// Both stacks are pre-normalized: every sublayer sees layer_norm(x) and its
// output is added back onto x.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "altgen/ops.hpp"
#include "altgen/parameters.hpp"

namespace altgen {

struct AttentionHeadConfig {
  std::size_t model_dim = 64;
  std::size_t num_heads = 8;

  std::size_t head_dim() const { return model_dim / num_heads; }
  // Throws ConfigError unless model_dim is a positive multiple of num_heads.
  void validate() const;
};

// Which key positions each query may attend to (row-major, 1 = allowed).
struct AttentionMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> allowed;

  static AttentionMask full(std::size_t rows, std::size_t cols);
  // Query i sees keys 0..i.
  static AttentionMask causal(std::size_t n);
  bool at(std::size_t r, std::size_t c) const { return allowed[r * cols + c] != 0; }
};

// Weights and pre-softmax logits of one attention call, per head.
struct AttentionCapture {
  std::size_t heads = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> weights;  // heads x rows x cols
  std::vector<float> logits;   // scaled scores; masked entries are -inf

  float weight(std::size_t h, std::size_t r, std::size_t c) const {
    return weights[(h * rows + r) * cols + c];
  }
};

struct AttentionRecorder {
  std::vector<AttentionCapture> layers;
};

// softmax(q_h k_h^T / sqrt(d_h)) v_h per head, heads concatenated along
// columns. A query row with no allowed key is a ContractError.
template <typename T>
Tensor<T> multi_head_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                               std::size_t num_heads, const AttentionMask* mask,
                               AttentionCapture* capture);

template <typename T>
struct AttentionOutput {
  Tensor<T> output;
  AttentionCapture weights;
};

// Single-head form: q[sq x dk], k[sk x dk], v[sk x dv].
template <typename T>
AttentionOutput<T> scaled_dot_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                                        const AttentionMask* mask = nullptr);

template <typename T>
struct LayerNormParams {
  Tensor<T> gain;
  Tensor<T> bias;

  static LayerNormParams create(ParameterStore<T>& store, const std::string& prefix, std::size_t dim);
  Tensor<T> apply(const Tensor<T>& x, T eps) const { return layer_norm(x, gain, bias, eps); }
};

template <typename T>
struct FeedForwardParams {
  Tensor<T> w1, b1, w2, b2;

  static FeedForwardParams create(ParameterStore<T>& store, const std::string& prefix, std::size_t dim,
                                  std::size_t inner_dim, std::mt19937_64& rng);
};

// W_2 . max(0, W_1 x + b_1) + b_2, row-wise.
template <typename T>
Tensor<T> feed_forward(const Tensor<T>& x, const FeedForwardParams<T>& p);

template <typename T>
struct MultiHeadAttentionParams {
  Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;

  static MultiHeadAttentionParams create(ParameterStore<T>& store, const std::string& prefix,
                                         std::size_t dim, std::mt19937_64& rng);
};

// Projects queries from `queries` and keys/values from `memory`, attends,
// and applies the output projection.
template <typename T>
Tensor<T> attention_block(const Tensor<T>& queries, const Tensor<T>& memory,
                          const MultiHeadAttentionParams<T>& p, std::size_t num_heads,
                          const AttentionMask* mask, AttentionCapture* capture);

// Per-call knobs shared by encoder layers and decoder blocks.
template <typename T>
struct ForwardContext {
  T ln_eps = T(1e-5);
  T dropout = T(0);
  std::mt19937_64* rng = nullptr;  // required when dropout > 0
  AttentionRecorder* recorder = nullptr;
  // Optional restriction of encoder self-attention (ablation hook).
  const AttentionMask* encoder_mask = nullptr;
};

template <typename T>
struct EncoderLayer {
  AttentionHeadConfig heads;
  MultiHeadAttentionParams<T> attn;
  FeedForwardParams<T> ffn;
  LayerNormParams<T> ln1, ln2;

  static EncoderLayer create(ParameterStore<T>& store, const std::string& prefix,
                             const AttentionHeadConfig& heads, std::size_t ffn_dim, std::mt19937_64& rng);
};

// Full self-attention over the sequence, so each token attends to itself and
// to every other token, followed by the feed-forward sublayer.
template <typename T>
Tensor<T> encoder_layer_forward(const Tensor<T>& x, const EncoderLayer<T>& layer, const ForwardContext<T>& ctx);

template <typename T>
struct DecoderBlock {
  AttentionHeadConfig heads;
  MultiHeadAttentionParams<T> self_attn;
  MultiHeadAttentionParams<T> cross_attn;
  FeedForwardParams<T> ffn;
  LayerNormParams<T> ln1, ln2, ln3;

  static DecoderBlock create(ParameterStore<T>& store, const std::string& prefix,
                             const AttentionHeadConfig& heads, std::size_t ffn_dim, std::mt19937_64& rng);
};

// Causal self-attention over h, cross-attention into term_feats, then the
// feed-forward sublayer.
template <typename T>
Tensor<T> decoder_block_forward(const Tensor<T>& h, const Tensor<T>& term_feats, const DecoderBlock<T>& block,
                                const AttentionMask& causal_mask, const ForwardContext<T>& ctx);

// Glorot-normal standard deviation for a fan_in x fan_out weight.
double glorot_stddev(std::size_t fan_in, std::size_t fan_out);

}  // namespace altgen
