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


#include "altgen/terminology_encoder.hpp"

#include <algorithm>
#include <cmath>

#include "altgen/errors.hpp"

namespace altgen {

std::string_view branch_name(Branch branch) { return branch == Branch::kVisual ? "visual" : "textual"; }

void TerminologyEncoderConfig::validate() const {
  if (terminology_names.empty()) throw ConfigError("at least one terminology is required");
  if (term_dim == 0 || visual_dim == 0 || text_dim == 0) throw ConfigError("embedding dims must be positive");
  if (text_vocab == 0) throw ConfigError("textbook vocabulary must not be empty");
  if (max_text_len == 0) throw ConfigError("max_text_len must be positive");
  if (grid_height == 0 || grid_width == 0 || grid_channels == 0) throw ConfigError("grid dimensions must be positive");
  if (num_layers == 0) throw ConfigError("encoder needs at least one layer");
  heads.validate();
}

template <typename T>
ClassifierHead<T> ClassifierHead<T>::create(ParameterStore<T>& store, const std::string& prefix, std::size_t dim,
                                            std::mt19937_64& rng) {
  return {store.add_normal(prefix + ".w", {dim, 1}, glorot_stddev(dim, 1), rng), store.add_zeros(prefix + ".b", {1})};
}

namespace {

template <typename T>
BranchStack<T> make_stack(ParameterStore<T>& store, const std::string& prefix, std::size_t in_dim,
                          const TerminologyEncoderConfig& config, std::mt19937_64& rng) {
  const std::size_t d = config.heads.model_dim;
  BranchStack<T> s;
  s.proj_w = store.add_normal(prefix + ".proj.w", {in_dim, d}, glorot_stddev(in_dim, d), rng);
  s.proj_b = store.add_zeros(prefix + ".proj.b", {d});
  s.segment = store.add_normal(prefix + ".segment", {d}, config.embed_stddev, rng);
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    s.layers.push_back(EncoderLayer<T>::create(store, prefix + ".encoder.layer" + std::to_string(l), config.heads,
                                               config.ffn_dim, rng));
  }
  s.final_norm = LayerNormParams<T>::create(store, prefix + ".encoder.final_norm", d);
  return s;
}

template <typename T>
UnifiedFeatures<T> join(const Tensor<T>& terms, const Tensor<T>& context, Segment context_segment, Branch branch,
                        const std::vector<std::string>& term_labels, std::vector<std::string> context_labels) {
  const Tensor<T> parts[2] = {terms, context};
  UnifiedFeatures<T> u;
  u.seq = concat_rows<T>(parts);
  u.boundary = terms.rows();
  u.branch = branch;
  u.segment_ids.assign(terms.rows(), Segment::kTerminology);
  u.segment_ids.resize(terms.rows() + context.rows(), context_segment);
  u.labels = term_labels;
  u.labels.insert(u.labels.end(), std::make_move_iterator(context_labels.begin()),
                  std::make_move_iterator(context_labels.end()));
  return u;
}

}  // namespace

template <typename T>
TerminologyEncoder<T> TerminologyEncoder<T>::create(ParameterStore<T>& store, const TerminologyEncoderConfig& config,
                                                    std::mt19937_64& rng) {
  config.validate();
  const std::size_t d = config.heads.model_dim;
  const double sd = config.embed_stddev;
  TerminologyEncoder e;
  e.config_ = config;
  e.term_embed_ = store.add_normal("terminology.embed", {config.num_terms(), config.term_dim}, sd, rng);
  e.term_proj_w_ =
      store.add_normal("terminology.proj.w", {config.term_dim, d}, glorot_stddev(config.term_dim, d), rng);
  e.term_proj_b_ = store.add_zeros("terminology.proj.b", {d});
  e.term_segment_ = store.add_normal("terminology.segment", {d}, sd, rng);

  e.patch_ = PatchEmbedder<T>::create(store, "visual.patch", config.grid_height, config.grid_width, config.grid_channels,
                                      config.visual_dim, rng);
  e.pos_row_ = store.add_normal("visual.pos_row", {config.grid_height, d}, sd, rng);
  e.pos_col_ = store.add_normal("visual.pos_col", {config.grid_width, d}, sd, rng);
  e.visual_ = make_stack(store, "visual", config.visual_dim, config, rng);

  e.text_embed_ = store.add_normal("textual.embed", {config.text_vocab, config.text_dim}, sd, rng);
  e.text_pos_ = store.add_normal("textual.pos", {config.max_text_len, d}, sd, rng);
  e.textual_ = make_stack(store, "textual", config.text_dim, config, rng);

  e.head_ = ClassifierHead<T>::create(store, "classifier", d, rng);
  return e;
}

template <typename T>
Tensor<T> TerminologyEncoder<T>::projected_terminology() const {
  return add_row(linear(term_embed_, term_proj_w_, term_proj_b_), term_segment_);
}

template <typename T>
TextbookEmbeddings<T> TerminologyEncoder<T>::embed_text(std::span<const TokenId> ids, const Vocabulary* vocab) const {
  if (ids.empty()) throw ContractError("textbook context is empty");
  if (ids.size() > config_.max_text_len) {
    throw ContractError("textbook context of " + std::to_string(ids.size()) + " tokens exceeds " +
                        std::to_string(config_.max_text_len));
  }
  TextbookEmbeddings<T> out;
  for (TokenId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= config_.text_vocab) {
      throw ContractError("textbook token id " + std::to_string(id) + " outside vocabulary");
    }
    out.labels.push_back(vocab ? vocab->token(id) : "#" + std::to_string(id));
  }
  out.seq = gather_rows(text_embed_, ids);
  return out;
}

template <typename T>
UnifiedFeatures<T> TerminologyEncoder<T>::build_unified(const VisualContext<T>& context) const {
  if (!context.grid.defined() || context.height * context.width == 0) {
    throw ContractError("visual context is empty");
  }
  if (context.height != config_.grid_height || context.width != config_.grid_width ||
      context.grid.rows() != context.height * context.width) {
    throw ContractError("visual context shape does not match the configured grid");
  }
  std::vector<TokenId> rows, cols;
  std::vector<std::string> labels;
  for (std::size_t r = 0; r < context.height; ++r) {
    for (std::size_t c = 0; c < context.width; ++c) {
      rows.push_back(static_cast<TokenId>(r));
      cols.push_back(static_cast<TokenId>(c));
      labels.push_back("cell(" + std::to_string(r) + "," + std::to_string(c) + ")");
    }
  }
  Tensor<T> v = add_row(linear(context.grid, visual_.proj_w, visual_.proj_b), visual_.segment);
  v = add(v, add(gather_rows(pos_row_, std::span<const TokenId>(rows)),
                 gather_rows(pos_col_, std::span<const TokenId>(cols))));
  return join(projected_terminology(), v, Segment::kVisual, Branch::kVisual, config_.terminology_names,
              std::move(labels));
}

template <typename T>
UnifiedFeatures<T> TerminologyEncoder<T>::build_unified(const TextbookEmbeddings<T>& context) const {
  if (!context.seq.defined() || context.seq.rows() == 0) throw ContractError("textbook context is empty");
  const std::size_t n = context.seq.rows();
  if (n > config_.max_text_len) throw ContractError("textbook context longer than max_text_len");
  Tensor<T> e = add_row(linear(context.seq, textual_.proj_w, textual_.proj_b), textual_.segment);
  e = add(e, slice_rows(text_pos_, 0, n));
  std::vector<std::string> labels = context.labels;
  labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i].empty()) labels[i] = "#" + std::to_string(i);
  }
  return join(projected_terminology(), e, Segment::kTextual, Branch::kTextual, config_.terminology_names,
              std::move(labels));
}

template <typename T>
EncoderOutput<T> TerminologyEncoder<T>::encode(const UnifiedFeatures<T>& unified, const ForwardContext<T>& ctx) const {
  if (unified.boundary == 0 || unified.boundary >= unified.length()) {
    throw ContractError("unified features need terminology and context rows");
  }
  const BranchStack<T>& s = stack(unified.branch);
  Tensor<T> x = unified.seq;
  for (const auto& layer : s.layers) x = encoder_layer_forward(x, layer, ctx);
  x = s.final_norm.apply(x, ctx.ln_eps);
  return {x, slice_rows(x, 0, unified.boundary)};
}

AttentionMask segment_isolation_mask(std::span<const Segment> segments) {
  const std::size_t n = segments.size();
  AttentionMask m = AttentionMask::full(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const bool r_term = segments[r] == Segment::kTerminology;
    for (std::size_t c = 0; c < n; ++c) {
      m.allowed[r * n + c] = r_term == (segments[c] == Segment::kTerminology) ? 1 : 0;
    }
  }
  return m;
}

std::vector<double> classify(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  std::transform(logits.begin(), logits.end(), p.begin(), [](double z) { return stable_sigmoid(z); });
  return p;
}

double classification_loss(std::span<const double> probabilities, std::span<const double> labels) {
  if (probabilities.size() != labels.size() || labels.empty()) {
    throw ContractError("classification_loss: " + std::to_string(probabilities.size()) + " probabilities for " +
                        std::to_string(labels.size()) + " labels");
  }
  constexpr double kClamp = 1e-12;
  double total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) throw ContractError("classification label must be 0 or 1");
    const double p = std::clamp(probabilities[i], kClamp, 1.0 - kClamp);
    total -= labels[i] == 1.0 ? std::log(p) : std::log1p(-p);
  }
  return total / static_cast<double>(labels.size());
}

template <typename T>
Tensor<T> classification_loss(const Tensor<T>& logits, std::span<const T> labels) {
  return bce_with_logits_mean(logits, labels);
}

template struct ClassifierHead<float>;
template struct ClassifierHead<double>;
template class TerminologyEncoder<float>;
template class TerminologyEncoder<double>;
template Tensor<float> classification_loss<float>(const Tensor<float>&, std::span<const float>);
template Tensor<double> classification_loss<double>(const Tensor<double>&, std::span<const double>);

}  // namespace altgen
