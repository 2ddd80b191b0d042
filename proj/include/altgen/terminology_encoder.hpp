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

// Terminology encoder: a learned terminology table is concatenated with a
// visual or textual context, the joint sequence runs through a transformer
// encoder, and the leading N_m output rows become the terminology features.
//
//   P = [proj_m(M) ; proj_v(V)]   (visual branch)
//   Q = [proj_m(M) ; proj_e(E)]   (textual branch)
//
// The two branches own separate encoder stacks. The terminology table and
// the classifier head are shared.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "altgen/layers.hpp"
#include "altgen/patch_embed.hpp"
#include "altgen/vocabulary.hpp"

namespace altgen {

enum class Segment : std::uint8_t { kTerminology = 0, kVisual = 1, kTextual = 2 };
enum class Branch : std::uint8_t { kVisual = 0, kTextual = 1 };

std::string_view branch_name(Branch branch);

struct TerminologyEncoderConfig {
  std::vector<std::string> terminology_names;
  std::size_t term_dim = 64;     // d_m
  std::size_t visual_dim = 32;   // d_v
  std::size_t text_dim = 64;     // d_e
  std::size_t text_vocab = 0;
  std::size_t max_text_len = 64;
  std::size_t grid_height = 7;
  std::size_t grid_width = 7;
  std::size_t grid_channels = 4;
  AttentionHeadConfig heads;
  std::size_t num_layers = 2;
  std::size_t ffn_dim = 256;
  double embed_stddev = 0.02;

  std::size_t num_terms() const { return terminology_names.size(); }
  void validate() const;
};

template <typename T>
struct TextbookEmbeddings {
  Tensor<T> seq;                    // N_e x d_e
  std::vector<std::string> labels;  // token strings, one per row
};

template <typename T>
struct UnifiedFeatures {
  Tensor<T> seq;  // (N_m + N_c) x d
  std::vector<Segment> segment_ids;
  std::vector<std::string> labels;
  std::size_t boundary = 0;  // N_m
  Branch branch = Branch::kVisual;

  std::size_t length() const { return segment_ids.size(); }
};

template <typename T>
struct EncoderOutput {
  Tensor<T> full;         // final layer output, all rows
  Tensor<T> terminology;  // first N_m rows
};

template <typename T>
struct BranchStack {
  Tensor<T> proj_w, proj_b;
  Tensor<T> segment;
  std::vector<EncoderLayer<T>> layers;
  LayerNormParams<T> final_norm;
};

template <typename T>
struct ClassifierHead {
  Tensor<T> w;  // d x 1
  Tensor<T> b;  // 1

  static ClassifierHead create(ParameterStore<T>& store, const std::string& prefix, std::size_t dim,
                               std::mt19937_64& rng);
  // One logit per terminology row: N_m x 1.
  Tensor<T> logits(const Tensor<T>& term_feats) const { return linear(term_feats, w, b); }
};

template <typename T>
class TerminologyEncoder {
 public:
  TerminologyEncoder() = default;

  // Registers terminology.*, visual.*, textual.* and classifier.* parameters.
  static TerminologyEncoder create(ParameterStore<T>& store, const TerminologyEncoderConfig& config,
                                   std::mt19937_64& rng);

  const TerminologyEncoderConfig& config() const { return config_; }
  const Tensor<T>& terminology_table() const { return term_embed_; }
  const PatchEmbedder<T>& patch_embedder() const { return patch_; }
  const ClassifierHead<T>& classifier() const { return head_; }

  VisualContext<T> embed_image(const ImageGrid& image) const { return patch_.apply(image); }
  // Lookup-table embedding of textbook tokens; labels come from `vocab` if given.
  TextbookEmbeddings<T> embed_text(std::span<const TokenId> ids, const Vocabulary* vocab = nullptr) const;

  UnifiedFeatures<T> build_unified(const VisualContext<T>& context) const;
  UnifiedFeatures<T> build_unified(const TextbookEmbeddings<T>& context) const;

  EncoderOutput<T> encode(const UnifiedFeatures<T>& unified, const ForwardContext<T>& ctx = {}) const;

 private:
  Tensor<T> projected_terminology() const;
  const BranchStack<T>& stack(Branch branch) const {
    return branch == Branch::kVisual ? visual_ : textual_;
  }

  TerminologyEncoderConfig config_;
  Tensor<T> term_embed_, term_proj_w_, term_proj_b_, term_segment_;
  PatchEmbedder<T> patch_;
  Tensor<T> pos_row_, pos_col_;
  Tensor<T> text_embed_, text_pos_;
  BranchStack<T> visual_, textual_;
  ClassifierHead<T> head_;
};

// Terminology rows see only terminology rows and context rows only context
// rows; used to cut co-attention for ablation.
AttentionMask segment_isolation_mask(std::span<const Segment> segments);

// sigmoid of each logit, in double.
std::vector<double> classify(std::span<const double> logits);

// Mean binary cross-entropy from probabilities, clamped away from 0 and 1.
double classification_loss(std::span<const double> probabilities, std::span<const double> labels);

// The training form: mean binary cross-entropy evaluated from logits.
template <typename T>
Tensor<T> classification_loss(const Tensor<T>& logits, std::span<const T> labels);

}  // namespace altgen
