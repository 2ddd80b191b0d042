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


#include "altgen/evaluation.hpp"

#include <cstdio>
#include <sstream>

#include "altgen/errors.hpp"

namespace altgen {

void ClassificationCounts::add(std::span<const double> probabilities, std::span<const std::uint8_t> labels,
                               double threshold) {
  if (probabilities.size() != labels.size()) throw ContractError("classification counts: length mismatch");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = probabilities[i] >= threshold;
    const bool actual = labels[i] != 0;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
}

template <typename T>
EvaluationResult evaluate_model(const Model<T>& model, const Dataset& data, const Vocabulary& vocab,
                                const EvaluationOptions& options) {
  if (data.samples.empty()) throw ContractError("evaluation split '" + data.split + "' is empty");
  NoGradGuard no_grad;
  EvaluationResult out;
  double class_total = 0.0, lm_total = 0.0;
  std::size_t lm_tokens = 0;
  for (const auto& sample : data.samples) {
    const Tensor<T> feats = model.encode(sample).terminology;
    const Tensor<T> logits = model.encoder().classifier().logits(feats);
    const std::vector<double> z(logits.values().begin(), logits.values().end());
    const std::vector<double> probs = classify(z);
    out.classification.add(probs, sample.labels, options.threshold);
    std::vector<T> labels(sample.labels.begin(), sample.labels.end());
    class_total += static_cast<double>(classification_loss(logits, std::span<const T>(labels)).item());
    const LmLoss<T> lm = sequence_loss(model.decoder(), sample.tokens, feats);
    lm_total += static_cast<double>(lm.total.item());
    lm_tokens += lm.tokens;
    if (options.generate) {
      const std::vector<TokenId> ids = generate(model.decoder(), feats, options.decode);
      out.pairs.push_back(
          {std::to_string(sample.id), vocab.decode_words(ids), {vocab.decode_words(sample.tokens)}});
    }
  }
  const double n = static_cast<double>(data.samples.size());
  out.class_loss = class_total / n;
  out.lm_loss = lm_total / n;
  out.lm_token_loss = lm_tokens == 0 ? 0.0 : lm_total / static_cast<double>(lm_tokens);
  if (options.generate) out.captions = caption_metrics(out.pairs);
  return out;
}

EvaluationResult evaluate_ground_truth(const Dataset& data, const Vocabulary& vocab) {
  if (data.samples.empty()) throw ContractError("evaluation split '" + data.split + "' is empty");
  EvaluationResult out;
  for (const auto& sample : data.samples) {
    const Tokens words = vocab.decode_words(sample.tokens);
    out.pairs.push_back({std::to_string(sample.id), words, {words}});
    std::vector<double> probs(sample.labels.begin(), sample.labels.end());
    out.classification.add(probs, sample.labels);
  }
  out.captions = caption_metrics(out.pairs);
  return out;
}

namespace {

std::string join(const Tokens& words) {
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : " ") + w;
  return out;
}

}  // namespace

std::string pairs_to_jsonl(std::span<const EvalPair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["candidate"] = join(p.candidate);
    std::vector<std::string> refs;
    for (const auto& r : p.references) refs.push_back(join(r));
    j["references"] = refs;
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<EvalPair> pairs_from_jsonl(std::string_view text) {
  std::vector<EvalPair> pairs;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EvalPair p;
      p.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      p.candidate = split_words(j.at("candidate").get<std::string>());
      for (const auto& r : j.at("references")) p.references.push_back(split_words(r.get<std::string>()));
      if (p.references.empty()) throw ConfigError("pair file line " + std::to_string(line_no) + ": no references");
      pairs.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("pair file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (pairs.empty()) throw ConfigError("pair file holds no records");
  return pairs;
}

std::string metrics_table(const CaptionMetrics& captions, const ClassificationCounts* classification) {
  std::ostringstream out;
  char buf[96];
  out << "metric        raw       x100\n";
  auto row = [&](const std::string& name, double v) {
    std::snprintf(buf, sizeof(buf), "%-10s %9.6f %10.4f\n", name.c_str(), v, 100 * v);
    out << buf;
  };
  for (std::size_t n = 0; n < captions.bleu.size(); ++n) row("BLEU-" + std::to_string(n + 1), captions.bleu[n]);
  row("ROUGE-L", captions.rouge_l);
  row("CIDEr-D", captions.cider_d);
  if (classification) {
    row("Precision", classification->precision());
    row("Recall", classification->recall());
    row("F1", classification->f1());
  }
  return out.str();
}

nlohmann::ordered_json metrics_json(const CaptionMetrics& captions, const ClassificationCounts* classification) {
  nlohmann::ordered_json j;
  for (std::size_t n = 0; n < captions.bleu.size(); ++n) j["bleu_" + std::to_string(n + 1)] = captions.bleu[n];
  j["rouge_l"] = captions.rouge_l;
  j["cider_d"] = captions.cider_d;
  if (classification) {
    j["precision"] = classification->precision();
    j["recall"] = classification->recall();
    j["f1"] = classification->f1();
  }
  return j;
}

template EvaluationResult evaluate_model<float>(const Model<float>&, const Dataset&, const Vocabulary&,
                                                const EvaluationOptions&);
template EvaluationResult evaluate_model<double>(const Model<double>&, const Dataset&, const Vocabulary&,
                                                 const EvaluationOptions&);

}  // namespace altgen
