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

#include "altgen/layers.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Core>

#include "altgen/errors.hpp"

namespace altgen {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapC = Eigen::Map<const RowMat<T>>;
template <typename T>
using Map = Eigen::Map<RowMat<T>>;

}  // namespace

void AttentionHeadConfig::validate() const {
  if (model_dim == 0 || num_heads == 0 || model_dim % num_heads != 0) {
    throw ConfigError("model dimension " + std::to_string(model_dim) + " must be a positive multiple of the " +
                      std::to_string(num_heads) + " attention heads");
  }
}

AttentionMask AttentionMask::full(std::size_t rows, std::size_t cols) {
  return {rows, cols, std::vector<std::uint8_t>(rows * cols, 1)};
}

AttentionMask AttentionMask::causal(std::size_t n) {
  AttentionMask m{n, n, std::vector<std::uint8_t>(n * n, 0)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m.allowed[i * n + j] = 1;
  return m;
}

double glorot_stddev(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
}

template <typename T>
Tensor<T> multi_head_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                               std::size_t num_heads, const AttentionMask* mask,
                               AttentionCapture* capture) {
  const std::size_t sq = q.rows(), dk = q.cols(), sk = k.rows(), dv = v.cols();
  if (k.cols() != dk || v.rows() != sk) {
    throw DimensionError("attention: query " + shape_string(q.shape()) + ", key " + shape_string(k.shape()) +
                         ", value " + shape_string(v.shape()) + " are incompatible");
  }
  if (num_heads == 0 || dk % num_heads != 0 || dv % num_heads != 0) {
    throw DimensionError("attention: widths " + std::to_string(dk) + "/" + std::to_string(dv) +
                         " not divisible into " + std::to_string(num_heads) + " heads");
  }
  if (mask && (mask->rows != sq || mask->cols != sk)) {
    throw DimensionError("attention: mask " + std::to_string(mask->rows) + "x" + std::to_string(mask->cols) +
                         " does not match scores " + std::to_string(sq) + "x" + std::to_string(sk));
  }
  const std::size_t hk = dk / num_heads, hv = dv / num_heads;
  const T scale_factor = T(1) / std::sqrt(static_cast<T>(hk));
  MapC<T> Q(q.values().data(), sq, dk), K(k.values().data(), sk, dk), V(v.values().data(), sk, dv);

  Buffer<T> probs(num_heads * sq * sk);
  Buffer<T> out(sq * dv);
  Map<T> O(out.data(), sq, dv);
  if (capture) {
    capture->heads = num_heads;
    capture->rows = sq;
    capture->cols = sk;
    capture->weights.assign(probs.size(), 0.0f);
    capture->logits.assign(probs.size(), 0.0f);
  }
  for (std::size_t h = 0; h < num_heads; ++h) {
    Map<T> P(probs.data() + h * sq * sk, sq, sk);
    P.noalias() = Q.middleCols(h * hk, hk) * K.middleCols(h * hk, hk).transpose();
    P *= scale_factor;
    for (std::size_t i = 0; i < sq; ++i) {
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < sk; ++j) {
        if (mask && !mask->at(i, j)) P(i, j) = -std::numeric_limits<T>::infinity();
        mx = std::max(mx, P(i, j));
      }
      if (mx == -std::numeric_limits<T>::infinity()) {
        throw ContractError("attention: query row " + std::to_string(i) + " has no attendable position");
      }
      if (capture) {
        for (std::size_t j = 0; j < sk; ++j) capture->logits[(h * sq + i) * sk + j] = static_cast<float>(P(i, j));
      }
      T total = 0;
      for (std::size_t j = 0; j < sk; ++j) {
        const T e = std::exp(P(i, j) - mx);
        P(i, j) = e;
        total += e;
      }
      for (std::size_t j = 0; j < sk; ++j) P(i, j) /= total;
    }
    O.middleCols(h * hv, hv).noalias() = P * V.middleCols(h * hv, hv);
    if (capture) {
      for (std::size_t i = 0; i < sq * sk; ++i) capture->weights[h * sq * sk + i] = static_cast<float>(P.data()[i]);
    }
  }

  auto pq = q.node(), pk = k.node(), pv = v.node();
  return detail::make_result<T>(
      {sq, dv}, std::move(out), {pq, pk, pv},
      [pq, pk, pv, probs = std::move(probs), num_heads, sq, sk, dk, dv, hk, hv, scale_factor](Node<T>& self) {
        MapC<T> G(self.grad.data(), sq, dv);
        MapC<T> Q(pq->value.data(), sq, dk), K(pk->value.data(), sk, dk), V(pv->value.data(), sk, dv);
        RowMat<T> dP(sq, sk);
        for (std::size_t h = 0; h < num_heads; ++h) {
          MapC<T> P(probs.data() + h * sq * sk, sq, sk);
          if (pv->requires_grad) {
            Map<T>(pv->grad_buffer().data(), sk, dv).middleCols(h * hv, hv).noalias() +=
                P.transpose() * G.middleCols(h * hv, hv);
          }
          if (!pq->requires_grad && !pk->requires_grad) continue;
          dP.noalias() = G.middleCols(h * hv, hv) * V.middleCols(h * hv, hv).transpose();
          // Softmax Jacobian, then the 1/sqrt(d) scaling.
          for (std::size_t i = 0; i < sq; ++i) {
            T dot = 0;
            for (std::size_t j = 0; j < sk; ++j) dot += dP(i, j) * P(i, j);
            for (std::size_t j = 0; j < sk; ++j) dP(i, j) = P(i, j) * (dP(i, j) - dot) * scale_factor;
          }
          if (pq->requires_grad) {
            Map<T>(pq->grad_buffer().data(), sq, dk).middleCols(h * hk, hk).noalias() +=
                dP * K.middleCols(h * hk, hk);
          }
          if (pk->requires_grad) {
            Map<T>(pk->grad_buffer().data(), sk, dk).middleCols(h * hk, hk).noalias() +=
                dP.transpose() * Q.middleCols(h * hk, hk);
          }
        }
      });
}

template <typename T>
AttentionOutput<T> scaled_dot_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                                        const AttentionMask* mask) {
  AttentionOutput<T> result;
  result.output = multi_head_attention(q, k, v, 1, mask, &result.weights);
  return result;
}

template <typename T>
LayerNormParams<T> LayerNormParams<T>::create(ParameterStore<T>& store, const std::string& prefix,
                                              std::size_t dim) {
  return {store.add_constant(prefix + ".gain", {dim}, T(1)), store.add_zeros(prefix + ".bias", {dim})};
}

template <typename T>
FeedForwardParams<T> FeedForwardParams<T>::create(ParameterStore<T>& store, const std::string& prefix,
                                                  std::size_t dim, std::size_t inner_dim, std::mt19937_64& rng) {
  FeedForwardParams p;
  p.w1 = store.add_normal(prefix + ".w1", {dim, inner_dim}, glorot_stddev(dim, inner_dim), rng);
  p.b1 = store.add_zeros(prefix + ".b1", {inner_dim});
  p.w2 = store.add_normal(prefix + ".w2", {inner_dim, dim}, glorot_stddev(inner_dim, dim), rng);
  p.b2 = store.add_zeros(prefix + ".b2", {dim});
  return p;
}

template <typename T>
Tensor<T> feed_forward(const Tensor<T>& x, const FeedForwardParams<T>& p) {
  return linear(relu(linear(x, p.w1, p.b1)), p.w2, p.b2);
}

template <typename T>
MultiHeadAttentionParams<T> MultiHeadAttentionParams<T>::create(ParameterStore<T>& store, const std::string& prefix,
                                                                std::size_t dim, std::mt19937_64& rng) {
  const double sd = glorot_stddev(dim, dim);
  MultiHeadAttentionParams p;
  p.wq = store.add_normal(prefix + ".wq", {dim, dim}, sd, rng);
  p.bq = store.add_zeros(prefix + ".bq", {dim});
  p.wk = store.add_normal(prefix + ".wk", {dim, dim}, sd, rng);
  p.bk = store.add_zeros(prefix + ".bk", {dim});
  p.wv = store.add_normal(prefix + ".wv", {dim, dim}, sd, rng);
  p.bv = store.add_zeros(prefix + ".bv", {dim});
  p.wo = store.add_normal(prefix + ".wo", {dim, dim}, sd, rng);
  p.bo = store.add_zeros(prefix + ".bo", {dim});
  return p;
}

template <typename T>
Tensor<T> attention_block(const Tensor<T>& queries, const Tensor<T>& memory, const MultiHeadAttentionParams<T>& p,
                          std::size_t num_heads, const AttentionMask* mask, AttentionCapture* capture) {
  Tensor<T> q = linear(queries, p.wq, p.bq);
  Tensor<T> k = linear(memory, p.wk, p.bk);
  Tensor<T> v = linear(memory, p.wv, p.bv);
  return linear(multi_head_attention(q, k, v, num_heads, mask, capture), p.wo, p.bo);
}

namespace {

template <typename T>
Tensor<T> maybe_dropout(const Tensor<T>& x, const ForwardContext<T>& ctx) {
  if (ctx.dropout <= T(0)) return x;
  if (!ctx.rng) throw ContractError("dropout requires a random generator");
  return dropout(x, ctx.dropout, *ctx.rng);
}

}  // namespace

template <typename T>
EncoderLayer<T> EncoderLayer<T>::create(ParameterStore<T>& store, const std::string& prefix,
                                        const AttentionHeadConfig& heads, std::size_t ffn_dim, std::mt19937_64& rng) {
  heads.validate();
  EncoderLayer layer;
  layer.heads = heads;
  layer.ln1 = LayerNormParams<T>::create(store, prefix + ".ln1", heads.model_dim);
  layer.attn = MultiHeadAttentionParams<T>::create(store, prefix + ".attn", heads.model_dim, rng);
  layer.ln2 = LayerNormParams<T>::create(store, prefix + ".ln2", heads.model_dim);
  layer.ffn = FeedForwardParams<T>::create(store, prefix + ".ffn", heads.model_dim, ffn_dim, rng);
  return layer;
}

template <typename T>
Tensor<T> encoder_layer_forward(const Tensor<T>& x, const EncoderLayer<T>& layer, const ForwardContext<T>& ctx) {
  AttentionCapture* capture = nullptr;
  if (ctx.recorder) capture = &ctx.recorder->layers.emplace_back();
  Tensor<T> normed = layer.ln1.apply(x, ctx.ln_eps);
  Tensor<T> attended = attention_block(normed, normed, layer.attn, layer.heads.num_heads, ctx.encoder_mask, capture);
  Tensor<T> h = add(x, maybe_dropout(attended, ctx));
  return add(h, maybe_dropout(feed_forward(layer.ln2.apply(h, ctx.ln_eps), layer.ffn), ctx));
}

template <typename T>
DecoderBlock<T> DecoderBlock<T>::create(ParameterStore<T>& store, const std::string& prefix,
                                        const AttentionHeadConfig& heads, std::size_t ffn_dim, std::mt19937_64& rng) {
  heads.validate();
  DecoderBlock block;
  block.heads = heads;
  block.ln1 = LayerNormParams<T>::create(store, prefix + ".ln1", heads.model_dim);
  block.self_attn = MultiHeadAttentionParams<T>::create(store, prefix + ".self_attn", heads.model_dim, rng);
  block.ln2 = LayerNormParams<T>::create(store, prefix + ".ln2", heads.model_dim);
  block.cross_attn = MultiHeadAttentionParams<T>::create(store, prefix + ".cross_attn", heads.model_dim, rng);
  block.ln3 = LayerNormParams<T>::create(store, prefix + ".ln3", heads.model_dim);
  block.ffn = FeedForwardParams<T>::create(store, prefix + ".ffn", heads.model_dim, ffn_dim, rng);
  return block;
}

template <typename T>
Tensor<T> decoder_block_forward(const Tensor<T>& h, const Tensor<T>& term_feats, const DecoderBlock<T>& block,
                                const AttentionMask& causal_mask, const ForwardContext<T>& ctx) {
  if (!term_feats.defined()) throw ContractError("decoder block needs terminology features");
  const std::size_t n = h.rows();
  if (causal_mask.rows != n || causal_mask.cols != n) {
    throw DimensionError("decoder block: causal mask does not match sequence length " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (causal_mask.at(i, j)) throw ContractError("decoder block: mask lets position " + std::to_string(i) +
                                                    " see future position " + std::to_string(j));
    }
  }
  Tensor<T> normed = block.ln1.apply(h, ctx.ln_eps);
  Tensor<T> x = add(h, maybe_dropout(attention_block(normed, normed, block.self_attn, block.heads.num_heads,
                                                     &causal_mask, static_cast<AttentionCapture*>(nullptr)),
                                     ctx));
  Tensor<T> cross = attention_block(block.ln2.apply(x, ctx.ln_eps), term_feats, block.cross_attn,
                                    block.heads.num_heads, nullptr, static_cast<AttentionCapture*>(nullptr));
  x = add(x, maybe_dropout(cross, ctx));
  return add(x, maybe_dropout(feed_forward(block.ln3.apply(x, ctx.ln_eps), block.ffn), ctx));
}

#define ALTGEN_INSTANTIATE_LAYERS(T)                                                                            \
  template Tensor<T> multi_head_attention<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t, \
                                             const AttentionMask*, AttentionCapture*);                          \
  template AttentionOutput<T> scaled_dot_attention<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                                      const AttentionMask*);                                    \
  template struct LayerNormParams<T>;                                                                           \
  template struct FeedForwardParams<T>;                                                                         \
  template struct MultiHeadAttentionParams<T>;                                                                  \
  template Tensor<T> feed_forward<T>(const Tensor<T>&, const FeedForwardParams<T>&);                            \
  template Tensor<T> attention_block<T>(const Tensor<T>&, const Tensor<T>&, const MultiHeadAttentionParams<T>&, \
                                        std::size_t, const AttentionMask*, AttentionCapture*);                  \
  template struct EncoderLayer<T>;                                                                              \
  template Tensor<T> encoder_layer_forward<T>(const Tensor<T>&, const EncoderLayer<T>&,                         \
                                              const ForwardContext<T>&);                                        \
  template struct DecoderBlock<T>;                                                                              \
  template Tensor<T> decoder_block_forward<T>(const Tensor<T>&, const Tensor<T>&, const DecoderBlock<T>&,       \
                                              const AttentionMask&, const ForwardContext<T>&);

ALTGEN_INSTANTIATE_LAYERS(float)
ALTGEN_INSTANTIATE_LAYERS(double)

}  // namespace altgen
