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


#include "altgen/grammar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "altgen/binary_io.hpp"
#include "altgen/errors.hpp"
#include "altgen/vocabulary.hpp"
#include "json.hpp"

namespace altgen {

namespace {

using nlohmann::ordered_json;

constexpr std::string_view kPlaceholder = "{term}";

const std::vector<std::string>& term_inventory() {
  static const std::vector<std::string> names = {
      "ground glass opacity", "consolidation", "pleural effusion", "nodule", "cavity", "fibrosis",
      "atelectasis", "emphysema", "pneumothorax", "cardiomegaly", "bronchiectasis", "calcification",
      "lymphadenopathy", "interstitial thickening", "crazy paving pattern", "air bronchogram", "mass",
      "hilar enlargement", "pulmonary edema", "infiltrate", "scarring", "bulla", "granuloma", "hyperinflation"};
  return names;
}

bool contains_sequence(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

std::string render(const std::string& tmpl, const std::string& term) {
  std::string out = tmpl;
  const auto pos = out.find(kPlaceholder);
  out.replace(pos, kPlaceholder.size(), term);
  return out;
}

std::size_t pick_weighted(const std::vector<TemplateChoice>& choices, std::mt19937_64& rng) {
  std::vector<double> w;
  for (const auto& c : choices) w.push_back(c.weight);
  return std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng);
}

double log_choose(std::size_t n, std::size_t k) {
  return std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(k) + 1) -
         std::lgamma(static_cast<double>(n - k) + 1);
}

// Number of distinct (subset, template) renderings with subset sizes in [lo, hi].
double combinations(std::size_t terms, std::size_t lo, std::size_t hi, std::size_t templates) {
  double total = 0;
  for (std::size_t k = lo; k <= std::min(hi, terms); ++k) {
    total += std::exp(log_choose(terms, k) + static_cast<double>(k) * std::log(static_cast<double>(templates)));
  }
  return total;
}

ordered_json templates_to_json(const std::vector<TemplateChoice>& ts) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : ts) arr.push_back({{"text", t.text}, {"weight", t.weight}});
  return arr;
}

std::vector<TemplateChoice> templates_from_json(const ordered_json& arr) {
  std::vector<TemplateChoice> out;
  for (const auto& t : arr) out.push_back({t.at("text").get<std::string>(), t.at("weight").get<double>()});
  return out;
}

std::vector<std::size_t> sample_subset(std::size_t n, std::size_t size, std::mt19937_64& rng) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t i = 0; i < size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(size);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

std::vector<std::string> SyntheticGrammar::terminology_names() const {
  std::vector<std::string> names;
  for (const auto& t : terms) names.push_back(t.name);
  return names;
}

void SyntheticGrammar::validate() const {
  if (terms.empty()) throw ConfigError("grammar '" + name + "' has no terminologies");
  if (grid_height == 0 || grid_width == 0 || channels == 0) throw ConfigError("grammar grid must be non-empty");
  if (report_templates.size() < 2) throw ConfigError("grammar needs at least two report templates");
  if (max_findings == 0) throw ConfigError("max_findings must be positive");
  if (!(normal_prob >= 0 && normal_prob <= 1)) throw ConfigError("normal_prob must lie in [0,1]");
  std::set<std::pair<std::size_t, std::size_t>> cells;
  std::set<std::string> seen;
  std::vector<std::vector<std::string>> term_words;
  for (const auto& t : terms) {
    if (t.name.empty() || normalize_text(t.name) != t.name) {
      throw ConfigError("terminology name '" + t.name + "' must be non-empty normalized text");
    }
    if (!seen.insert(t.name).second) throw ConfigError("duplicate terminology '" + t.name + "'");
    if (t.patterns.empty()) throw ConfigError("terminology '" + t.name + "' has no visual pattern");
    for (const auto& p : t.patterns) {
      if (p.row >= grid_height || p.col >= grid_width) {
        throw ConfigError("pattern of '" + t.name + "' lies outside the grid");
      }
      if (p.signature.size() != channels) throw ConfigError("pattern of '" + t.name + "' has wrong channel count");
      if (!cells.insert({p.row, p.col}).second) {
        throw ConfigError("pattern cell (" + std::to_string(p.row) + "," + std::to_string(p.col) +
                          ") is used twice");
      }
    }
    term_words.push_back(split_words(t.name));
  }
  for (std::size_t i = 0; i < term_words.size(); ++i) {
    for (std::size_t j = 0; j < term_words.size(); ++j) {
      if (i != j && contains_sequence(term_words[i], term_words[j])) {
        throw ConfigError("terminology '" + terms[i].name + "' contains '" + terms[j].name + "'");
      }
    }
  }
  auto check_free = [&](const std::string& text, const char* what) {
    const auto words = split_words(text);
    for (std::size_t j = 0; j < term_words.size(); ++j) {
      if (contains_sequence(words, term_words[j])) {
        throw ConfigError(std::string(what) + " '" + text + "' mentions terminology '" + terms[j].name + "'");
      }
    }
  };
  for (const auto* list : {&report_templates, &textbook_templates}) {
    for (const auto& t : *list) {
      const auto first = t.text.find(kPlaceholder);
      if (first == std::string::npos || t.text.find(kPlaceholder, first + 1) != std::string::npos) {
        throw ConfigError("template '" + t.text + "' must contain {term} exactly once");
      }
      if (!(t.weight > 0)) throw ConfigError("template '" + t.text + "' needs a positive weight");
      check_free(render(t.text, ""), "template");
    }
  }
  for (const auto& s : normal_sentences) check_free(s, "normal sentence");
  check_free(clear_sentence, "clear sentence");
}

std::string SyntheticGrammar::to_json() const {
  ordered_json j;
  j["name"] = name;
  j["seed"] = seed;
  j["grid"] = {{"height", grid_height}, {"width", grid_width}, {"channels", channels}};
  j["noise_stddev"] = noise_stddev;
  j["distractor_prob"] = distractor_prob;
  j["distractor_amplitude"] = distractor_amplitude;
  j["normal_prob"] = normal_prob;
  j["max_findings"] = max_findings;
  ordered_json ts = ordered_json::array();
  for (const auto& t : terms) {
    ordered_json pats = ordered_json::array();
    for (const auto& p : t.patterns) pats.push_back({{"row", p.row}, {"col", p.col}, {"signature", p.signature}});
    ts.push_back({{"name", t.name}, {"patterns", pats}});
  }
  j["terminologies"] = ts;
  j["report_templates"] = templates_to_json(report_templates);
  j["textbook_templates"] = templates_to_json(textbook_templates);
  j["normal_sentences"] = normal_sentences;
  j["clear_sentence"] = clear_sentence;
  return j.dump(2) + "\n";
}

SyntheticGrammar SyntheticGrammar::from_json(std::string_view text) {
  SyntheticGrammar g;
  try {
    const ordered_json j = ordered_json::parse(text);
    g.name = j.at("name").get<std::string>();
    g.seed = j.at("seed").get<std::uint64_t>();
    g.grid_height = j.at("grid").at("height").get<std::size_t>();
    g.grid_width = j.at("grid").at("width").get<std::size_t>();
    g.channels = j.at("grid").at("channels").get<std::size_t>();
    g.noise_stddev = j.at("noise_stddev").get<double>();
    g.distractor_prob = j.at("distractor_prob").get<double>();
    g.distractor_amplitude = j.at("distractor_amplitude").get<double>();
    g.normal_prob = j.at("normal_prob").get<double>();
    g.max_findings = j.at("max_findings").get<std::size_t>();
    for (const auto& t : j.at("terminologies")) {
      TerminologySpec spec;
      spec.name = t.at("name").get<std::string>();
      for (const auto& p : t.at("patterns")) {
        spec.patterns.push_back({p.at("row").get<std::size_t>(), p.at("col").get<std::size_t>(),
                                 p.at("signature").get<std::vector<float>>()});
      }
      g.terms.push_back(std::move(spec));
    }
    g.report_templates = templates_from_json(j.at("report_templates"));
    g.textbook_templates = templates_from_json(j.at("textbook_templates"));
    g.normal_sentences = j.at("normal_sentences").get<std::vector<std::string>>();
    g.clear_sentence = j.at("clear_sentence").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("grammar file: ") + e.what());
  }
  g.validate();
  return g;
}

SyntheticGrammar SyntheticGrammar::load(const std::filesystem::path& path) { return from_json(read_file(path)); }

void SyntheticGrammar::save(const std::filesystem::path& path) const { write_file(path, to_json()); }

std::string SyntheticGrammar::hash() const { return sha256_hex(to_json()); }

SyntheticGrammar default_grammar(std::size_t num_terms, std::uint64_t seed, int variant) {
  constexpr std::size_t kHeight = 7, kWidth = 7, kChannels = 4;
  const auto& inventory = term_inventory();
  if (num_terms == 0 || num_terms > inventory.size()) {
    throw ConfigError("num_terms must lie in [1, " + std::to_string(inventory.size()) + "]");
  }
  const std::size_t cells = kHeight * kWidth;
  const std::size_t per_term = 2 * num_terms <= cells ? 2 : 1;
  if (num_terms * per_term > cells) throw ConfigError("too many terminologies for a 7x7 grid");

  SyntheticGrammar g;
  g.name = variant == 0 ? "A" : "B";
  g.seed = seed * 2 + static_cast<std::uint64_t>(variant != 0);

  // Patterns depend on `seed` only, so both variants read images the same way.
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t next_cell = 0;
  for (std::size_t i = 0; i < num_terms; ++i) {
    TerminologySpec t;
    t.name = inventory[i];
    for (std::size_t p = 0; p < per_term; ++p) {
      VisualPattern pat;
      pat.row = order[next_cell] / kWidth;
      pat.col = order[next_cell] % kWidth;
      ++next_cell;
      std::vector<double> s(kChannels);
      double norm = 0;
      for (auto& v : s) {
        v = normal(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (double v : s) pat.signature.push_back(static_cast<float>(v / norm));
      t.patterns.push_back(std::move(pat));
    }
    g.terms.push_back(std::move(t));
  }
  const double major = 0.8, minor = 0.2;
  g.report_templates = {{"{term} is seen in the lungs .", variant == 0 ? major : minor},
                        {"there is evidence of {term} .", variant == 0 ? minor : major}};
  g.textbook_templates = {{"{term} is a common finding in chest imaging .", 1.0},
                          {"patients with {term} may present with cough and fever .", 1.0}};
  g.normal_sentences = {"the heart size is normal .", "the bony thorax is intact ."};
  g.clear_sentence = "the lungs are clear .";
  g.validate();
  return g;
}

std::vector<std::uint8_t> mentioned_terms(const SyntheticGrammar& grammar, std::string_view text) {
  const auto words = split_words(text);
  std::vector<std::uint8_t> y;
  for (const auto& t : grammar.terms) y.push_back(contains_sequence(words, split_words(t.name)) ? 1 : 0);
  return y;
}

std::vector<std::uint8_t> oracle_classify(const SyntheticGrammar& grammar, const ImageGrid& image) {
  std::vector<std::uint8_t> y;
  for (const auto& t : grammar.terms) {
    bool present = false;
    for (const auto& p : t.patterns) {
      double dot = 0, norm2 = 0;
      for (std::size_t ch = 0; ch < grammar.channels; ++ch) {
        dot += static_cast<double>(image.at(p.row, p.col, ch)) * p.signature[ch];
        norm2 += static_cast<double>(p.signature[ch]) * p.signature[ch];
      }
      if (dot / norm2 > 0.5) present = true;
    }
    y.push_back(present ? 1 : 0);
  }
  return y;
}

RawCorpus generate_corpus(const SyntheticGrammar& grammar, const CorpusSizes& sizes, std::uint64_t first_id) {
  grammar.validate();
  const std::size_t n = grammar.num_terms();
  const std::size_t k_max = std::min(grammar.max_findings, n);
  const double transfer_combos = combinations(n, 0, k_max, grammar.report_templates.size());
  const double textbook_combos =
      combinations(n, 1, k_max, grammar.report_templates.size() + grammar.textbook_templates.size());
  const double transfer_requested = static_cast<double>(sizes.train + sizes.val + sizes.test);
  if (transfer_requested > transfer_combos) {
    throw ConfigError("requested " + std::to_string(sizes.train + sizes.val + sizes.test) +
                      " image-report samples but the grammar renders only " +
                      std::to_string(static_cast<std::size_t>(transfer_combos)) + " distinct reports");
  }
  if (static_cast<double>(sizes.textbook) > textbook_combos) {
    throw ConfigError("requested " + std::to_string(sizes.textbook) + " textbook documents but the grammar renders only " +
                      std::to_string(static_cast<std::size_t>(textbook_combos)) + " distinct documents");
  }

  std::set<std::pair<std::size_t, std::size_t>> assigned;
  for (const auto& t : grammar.terms)
    for (const auto& p : t.patterns) assigned.insert({p.row, p.col});

  std::mt19937_64 rng(grammar.seed);
  std::normal_distribution<double> noise(0.0, grammar.noise_stddev);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> finding_count(1, k_max);
  std::uint64_t next_id = first_id;

  auto transfer_sample = [&]() {
    RawSample s;
    s.id = next_id++;
    s.kind = SampleKind::kTransfer;
    s.labels.assign(n, 0);
    std::vector<std::size_t> subset;
    if (coin(rng) >= grammar.normal_prob) subset = sample_subset(n, finding_count(rng), rng);
    s.image = ImageGrid::zeros(grammar.grid_height, grammar.grid_width, grammar.channels);
    for (auto& v : s.image.values) v = static_cast<float>(noise(rng));
    for (std::size_t r = 0; r < grammar.grid_height; ++r) {
      for (std::size_t c = 0; c < grammar.grid_width; ++c) {
        if (assigned.count({r, c}) || coin(rng) >= grammar.distractor_prob) continue;
        std::vector<double> dir(grammar.channels);
        double norm = 0;
        for (auto& d : dir) {
          d = unit(rng);
          norm += d * d;
        }
        norm = std::sqrt(norm);
        for (std::size_t ch = 0; ch < grammar.channels; ++ch) {
          s.image.at(r, c, ch) += static_cast<float>(grammar.distractor_amplitude * dir[ch] / norm);
        }
      }
    }
    std::vector<std::string> sentences;
    for (std::size_t t : subset) {
      s.labels[t] = 1;
      const auto& pats = grammar.terms[t].patterns;
      const auto& pat = pats[std::uniform_int_distribution<std::size_t>(0, pats.size() - 1)(rng)];
      for (std::size_t ch = 0; ch < grammar.channels; ++ch) s.image.at(pat.row, pat.col, ch) += pat.signature[ch];
      sentences.push_back(render(grammar.report_templates[pick_weighted(grammar.report_templates, rng)].text,
                                 grammar.terms[t].name));
    }
    if (subset.empty()) sentences.push_back(grammar.clear_sentence);
    sentences.insert(sentences.end(), grammar.normal_sentences.begin(), grammar.normal_sentences.end());
    std::string text;
    for (const auto& sent : sentences) text += (text.empty() ? "" : " ") + sent;
    s.text = normalize_text(text);
    return s;
  };

  std::vector<TemplateChoice> textbook_choices = grammar.textbook_templates;
  textbook_choices.insert(textbook_choices.end(), grammar.report_templates.begin(), grammar.report_templates.end());
  std::uniform_int_distribution<std::size_t> textbook_pick(0, textbook_choices.size() - 1);
  auto textbook_sample = [&]() {
    RawSample s;
    s.id = next_id++;
    s.kind = SampleKind::kPretrain;
    s.labels.assign(n, 0);
    std::string text;
    for (std::size_t t : sample_subset(n, finding_count(rng), rng)) {
      s.labels[t] = 1;
      text += (text.empty() ? "" : " ") + render(textbook_choices[textbook_pick(rng)].text, grammar.terms[t].name);
    }
    s.text = normalize_text(text);
    return s;
  };

  RawCorpus corpus;
  for (std::size_t i = 0; i < sizes.textbook; ++i) corpus.textbook.push_back(textbook_sample());
  for (std::size_t i = 0; i < sizes.train; ++i) corpus.train.push_back(transfer_sample());
  for (std::size_t i = 0; i < sizes.val; ++i) corpus.val.push_back(transfer_sample());
  for (std::size_t i = 0; i < sizes.test; ++i) corpus.test.push_back(transfer_sample());
  return corpus;
}

}  // namespace altgen
