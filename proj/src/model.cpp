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


#include "altgen/model.hpp"

#include "altgen/errors.hpp"

namespace altgen {

nlohmann::ordered_json ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["model_dim"] = model_dim;
  j["num_heads"] = num_heads;
  j["encoder_layers"] = encoder_layers;
  j["decoder_layers"] = decoder_layers;
  j["ffn_dim"] = ffn_dim;
  j["term_dim"] = term_dim;
  j["visual_dim"] = visual_dim;
  j["text_dim"] = text_dim;
  j["max_len"] = max_len;
  j["embed_stddev"] = embed_stddev;
  j["vocab_size"] = vocab_size;
  j["terminology_names"] = terminology_names;
  j["grid"] = {{"height", grid_height}, {"width", grid_width}, {"channels", grid_channels}};
  return j;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.model_dim = j.at("model_dim").get<std::size_t>();
  c.num_heads = j.at("num_heads").get<std::size_t>();
  c.encoder_layers = j.at("encoder_layers").get<std::size_t>();
  c.decoder_layers = j.at("decoder_layers").get<std::size_t>();
  c.ffn_dim = j.at("ffn_dim").get<std::size_t>();
  c.term_dim = j.at("term_dim").get<std::size_t>();
  c.visual_dim = j.at("visual_dim").get<std::size_t>();
  c.text_dim = j.at("text_dim").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.embed_stddev = j.at("embed_stddev").get<double>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.terminology_names = j.at("terminology_names").get<std::vector<std::string>>();
  c.grid_height = j.at("grid").at("height").get<std::size_t>();
  c.grid_width = j.at("grid").at("width").get<std::size_t>();
  c.grid_channels = j.at("grid").at("channels").get<std::size_t>();
  return c;
}

void ModelConfig::validate() const {
  AttentionHeadConfig{model_dim, num_heads}.validate();
  if (encoder_layers == 0) throw ConfigError("model.encoder_layers must be positive");
  if (ffn_dim == 0) throw ConfigError("model.ffn_dim must be positive");
  if (max_len < 2) throw ConfigError("model.max_len must be at least 2");
  if (vocab_size <= static_cast<std::size_t>(kUnk)) throw ConfigError("vocabulary holds only reserved tokens");
  if (terminology_names.empty()) throw ConfigError("model needs at least one terminology");
}

namespace {

bool starts_with(const std::string& s, std::string_view prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

bool is_shared_parameter(const std::string& name) {
  return starts_with(name, "decoder.") || starts_with(name, "terminology.") || starts_with(name, "classifier.");
}
bool is_visual_parameter(const std::string& name) { return starts_with(name, "visual."); }
bool is_textual_parameter(const std::string& name) { return starts_with(name, "textual."); }
bool is_patch_parameter(const std::string& name) { return starts_with(name, "visual.patch."); }

template <typename T>
Model<T> Model<T>::create(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Model m;
  m.config_ = config;
  std::mt19937_64 rng(seed);
  const AttentionHeadConfig heads{config.model_dim, config.num_heads};

  TerminologyEncoderConfig ec;
  ec.terminology_names = config.terminology_names;
  ec.term_dim = config.term_dim;
  ec.visual_dim = config.visual_dim;
  ec.text_dim = config.text_dim;
  ec.text_vocab = config.vocab_size;
  ec.max_text_len = config.max_len;
  ec.grid_height = config.grid_height;
  ec.grid_width = config.grid_width;
  ec.grid_channels = config.grid_channels;
  ec.heads = heads;
  ec.num_layers = config.encoder_layers;
  ec.ffn_dim = config.ffn_dim;
  ec.embed_stddev = config.embed_stddev;
  m.encoder_ = TerminologyEncoder<T>::create(m.store_, ec, rng);

  DecoderConfig dc;
  dc.vocab_size = config.vocab_size;
  dc.heads = heads;
  dc.num_blocks = config.decoder_layers;
  dc.ffn_dim = config.ffn_dim;
  dc.max_len = config.max_len;
  dc.embed_stddev = config.embed_stddev;
  m.decoder_ = LanguageDecoder<T>::create(m.store_, "decoder", dc, rng);
  return m;
}

template <typename T>
UnifiedFeatures<T> Model<T>::unified(const Sample& sample, const Vocabulary* vocab) const {
  if (sample.has_image) return encoder_.build_unified(encoder_.embed_image(sample.image));
  return encoder_.build_unified(encoder_.embed_text(sample.tokens, vocab));
}

template <typename T>
EncoderOutput<T> Model<T>::encode(const Sample& sample, const ForwardContext<T>& ctx) const {
  return encoder_.encode(unified(sample), ctx);
}

template <typename T>
SampleForward<T> Model<T>::forward(const Sample& sample, const ForwardContext<T>& ctx) const {
  if (sample.labels.size() != config_.terminology_names.size()) {
    throw ContractError("sample " + std::to_string(sample.id) + " has " + std::to_string(sample.labels.size()) +
                        " labels for " + std::to_string(config_.terminology_names.size()) + " terminologies");
  }
  SampleForward<T> out;
  out.term_feats = encode(sample, ctx).terminology;
  out.class_logits = encoder_.classifier().logits(out.term_feats);
  std::vector<T> labels(sample.labels.begin(), sample.labels.end());
  out.class_loss = classification_loss(out.class_logits, std::span<const T>(labels));
  out.lm = sequence_loss(decoder_, sample.tokens, out.term_feats, ctx);
  return out;
}

template <typename T>
std::vector<TokenId> Model<T>::generate(const Sample& sample, const DecodeOptions& options) const {
  NoGradGuard no_grad;
  return altgen::generate(decoder_, encode(sample).terminology, options);
}

template <typename T>
std::vector<double> Model<T>::classify(const Sample& sample) const {
  NoGradGuard no_grad;
  Tensor<T> logits = encoder_.classifier().logits(encode(sample).terminology);
  std::vector<double> z(logits.values().begin(), logits.values().end());
  return altgen::classify(z);
}

template class Model<float>;
template class Model<double>;

}  // namespace altgen
