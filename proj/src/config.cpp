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


#include "altgen/config.hpp"

#include <cstdlib>
#include <sstream>

#include "altgen/binary_io.hpp"
#include "altgen/errors.hpp"

namespace altgen {

using nlohmann::json;
using nlohmann::ordered_json;

const ordered_json& RunConfig::defaults() {
  static const ordered_json tree = ordered_json::parse(R"({
    "seed": 1,
    "out_dir": "runs",
    "grammar": {"num_terms": 16, "seed": 7},
    "sizes": {"textbook": 500, "train": 2000, "val": 200, "test": 200},
    "sizes_b": {"textbook": 200, "train": 300, "val": 100, "test": 100},
    "model": {
      "model_dim": 64, "num_heads": 8, "encoder_layers": 2, "decoder_layers": 2, "ffn_dim": 256,
      "term_dim": 64, "visual_dim": 32, "text_dim": 64, "max_len": 64, "embed_stddev": 0.02
    },
    "schedule": {"m": 1, "n": 3, "epochs": 30},
    "flags": {"alternate_training": true, "transfer_learning": false, "external_knowledge": true},
    "training": {
      "target": "a", "lambda": 1.0, "lr": 1e-3, "patch_lr": 1e-6, "batch_size": 8, "clip_norm": 1.0,
      "dropout": 0.0, "early_stop": false, "patience": 5, "val_samples": 0
    },
    "stage_b": {"epochs": 30, "lr": 1e-3, "patch_lr": 1e-6},
    "decode": {"mode": "greedy", "beam_width": 4, "max_len": 64},
    "compare": {"schedules": "1,1;1,3;1,4;1,5", "seeds": "1,2,3"}
  })");
  return tree;
}

namespace {

bool same_kind(const ordered_json& a, const json& b) {
  if (a.is_number_unsigned() || a.is_number_integer()) return b.is_number_unsigned() || (b.is_number_integer() && b.get<std::int64_t>() >= 0);
  if (a.is_number_float()) return b.is_number();
  return a.type() == b.type();
}

void merge_into(ordered_json& dst, const json& src, const std::string& prefix, const std::string& source) {
  if (!src.is_object()) throw ConfigError(source + ": expected an object at '" + (prefix.empty() ? "<root>" : prefix) + "'");
  for (auto it = src.begin(); it != src.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!dst.contains(it.key())) throw ConfigError(source + ": unknown configuration key '" + key + "'");
    ordered_json& slot = dst[it.key()];
    if (slot.is_object()) {
      merge_into(slot, it.value(), key, source);
    } else if (!same_kind(slot, it.value())) {
      throw ConfigError(source + ": '" + key + "' expects a value like " + slot.dump() + ", got " + it.value().dump());
    } else if (slot.is_number_float()) {
      slot = it.value().get<double>();
    } else {
      slot = it.value();
    }
  }
}

ordered_json* find_leaf(ordered_json& tree, const std::string& dotted) {
  ordered_json* node = &tree;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return node->is_object() ? nullptr : node;
}

const ordered_json& at_path(const ordered_json& tree, std::initializer_list<const char*> path) {
  const ordered_json* node = &tree;
  for (const char* p : path) node = &node->at(p);
  return *node;
}

std::size_t get_size(const ordered_json& tree, std::initializer_list<const char*> path) {
  return at_path(tree, path).get<std::size_t>();
}

double get_double(const ordered_json& tree, std::initializer_list<const char*> path) {
  return at_path(tree, path).get<double>();
}

bool get_bool(const ordered_json& tree, std::initializer_list<const char*> path) {
  return at_path(tree, path).get<bool>();
}

std::string get_string(const ordered_json& tree, std::initializer_list<const char*> path) {
  return at_path(tree, path).get<std::string>();
}

void collect_leaves(const ordered_json& node, const std::string& prefix, std::vector<std::string>& out) {
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.value().is_object()) {
      collect_leaves(it.value(), key, out);
    } else {
      out.push_back(key);
    }
  }
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size() || text[0] == '-') throw ConfigError(what + ": '" + text + "' is not a count");
  return static_cast<std::size_t>(v);
}

}  // namespace

void RunConfig::merge(const json& overlay, const std::string& source) {
  ordered_json copy = tree;
  merge_into(copy, overlay, "", source);
  tree = std::move(copy);
}

void RunConfig::merge_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json overlay;
  try {
    overlay = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path.string() + "': " + e.what());
  }
  merge(overlay, path.string());
}

void RunConfig::set(const std::string& dotted_key, const std::string& text) {
  ordered_json* leaf = find_leaf(tree, dotted_key);
  if (!leaf) throw ConfigError("unknown configuration key '" + dotted_key + "'");
  const std::string where = "--" + dotted_key;
  if (leaf->is_boolean()) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
      *leaf = true;
    } else if (text == "false" || text == "0" || text == "no" || text == "off") {
      *leaf = false;
    } else {
      throw ConfigError(where + ": '" + text + "' is not a boolean (use true or false)");
    }
  } else if (leaf->is_number_unsigned() || leaf->is_number_integer()) {
    *leaf = static_cast<std::uint64_t>(parse_count(text, where));
  } else if (leaf->is_number_float()) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) throw ConfigError(where + ": '" + text + "' is not a number");
    *leaf = v;
  } else {
    *leaf = text;
  }
}

std::uint64_t RunConfig::seed() const { return tree.at("seed").get<std::uint64_t>(); }

std::filesystem::path RunConfig::out_dir() const { return tree.at("out_dir").get<std::string>(); }

std::string RunConfig::target_corpus() const { return get_string(tree, {"training", "target"}); }

CorpusSizes RunConfig::sizes(const std::string& corpus) const {
  const char* key = corpus == "b" ? "sizes_b" : "sizes";
  return {get_size(tree, {key, "textbook"}), get_size(tree, {key, "train"}), get_size(tree, {key, "val"}),
          get_size(tree, {key, "test"})};
}

SyntheticGrammar RunConfig::grammar(const std::string& corpus) const {
  return default_grammar(get_size(tree, {"grammar", "num_terms"}), tree.at("grammar").at("seed").get<std::uint64_t>(),
                         corpus == "b" ? 1 : 0);
}

ModelConfig RunConfig::model() const {
  ModelConfig m;
  m.model_dim = get_size(tree, {"model", "model_dim"});
  m.num_heads = get_size(tree, {"model", "num_heads"});
  m.encoder_layers = get_size(tree, {"model", "encoder_layers"});
  m.decoder_layers = get_size(tree, {"model", "decoder_layers"});
  m.ffn_dim = get_size(tree, {"model", "ffn_dim"});
  m.term_dim = get_size(tree, {"model", "term_dim"});
  m.visual_dim = get_size(tree, {"model", "visual_dim"});
  m.text_dim = get_size(tree, {"model", "text_dim"});
  m.max_len = get_size(tree, {"model", "max_len"});
  m.embed_stddev = get_double(tree, {"model", "embed_stddev"});
  return m;
}

TrainingConfig RunConfig::training() const {
  TrainingConfig t;
  t.schedule = {get_size(tree, {"schedule", "m"}), get_size(tree, {"schedule", "n"}),
                get_size(tree, {"schedule", "epochs"})};
  t.flags = {get_bool(tree, {"flags", "alternate_training"}), get_bool(tree, {"flags", "transfer_learning"}),
             get_bool(tree, {"flags", "external_knowledge"})};
  t.lambda = get_double(tree, {"training", "lambda"});
  t.lr = get_double(tree, {"training", "lr"});
  t.patch_lr = get_double(tree, {"training", "patch_lr"});
  t.batch_size = get_size(tree, {"training", "batch_size"});
  t.clip_norm = get_double(tree, {"training", "clip_norm"});
  t.dropout = get_double(tree, {"training", "dropout"});
  t.early_stop = get_bool(tree, {"training", "early_stop"});
  t.patience = get_size(tree, {"training", "patience"});
  t.val_samples = get_size(tree, {"training", "val_samples"});
  const std::string mode = get_string(tree, {"decode", "mode"});
  if (mode != "greedy" && mode != "beam") throw ConfigError("decode.mode must be 'greedy' or 'beam', got '" + mode + "'");
  t.decode.mode = mode == "beam" ? DecodeMode::kBeam : DecodeMode::kGreedy;
  t.decode.beam_width = get_size(tree, {"decode", "beam_width"});
  t.decode.max_len = get_size(tree, {"decode", "max_len"});
  t.seed = seed();
  return t;
}

TrainingConfig RunConfig::stage_b_training() const {
  TrainingConfig t = training();
  t.schedule.epochs = get_size(tree, {"stage_b", "epochs"});
  t.lr = get_double(tree, {"stage_b", "lr"});
  t.patch_lr = get_double(tree, {"stage_b", "patch_lr"});
  return t;
}

std::pair<std::size_t, std::size_t> parse_schedule(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("schedule '" + text + "' must look like m,n");
  return {parse_count(text.substr(0, comma), "schedule m"), parse_count(text.substr(comma + 1), "schedule n")};
}

std::vector<std::pair<std::size_t, std::size_t>> parse_schedule_list(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ';')) {
    if (!item.empty()) out.push_back(parse_schedule(item));
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> RunConfig::compare_schedules() const {
  return parse_schedule_list(get_string(tree, {"compare", "schedules"}));
}

std::vector<std::uint64_t> RunConfig::compare_seeds() const {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(get_string(tree, {"compare", "seeds"}));
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) seeds.push_back(parse_count(item, "compare.seeds"));
  }
  return seeds;
}

void RunConfig::validate() const {
  const TrainingConfig t = training();
  t.validate();
  const TrainingConfig b = stage_b_training();
  b.validate();
  const ModelConfig m = model();
  AttentionHeadConfig{m.model_dim, m.num_heads}.validate();
  if (m.encoder_layers == 0) throw ConfigError("model.encoder_layers must be positive");
  if (m.max_len < 2) throw ConfigError("model.max_len must be at least 2");
  if (t.decode.max_len > m.max_len) {
    throw ConfigError("decode.max_len (" + std::to_string(t.decode.max_len) + ") exceeds model.max_len (" +
                      std::to_string(m.max_len) + ")");
  }
  const std::string target = target_corpus();
  if (target != "a" && target != "b") throw ConfigError("training.target must be 'a' or 'b', got '" + target + "'");
  if (t.flags.transfer_learning && target != "b") {
    throw ConfigError("flags.transfer_learning trains on corpus a first and then fine-tunes, so training.target must be 'b'");
  }
  for (const char* corpus : {"a", "b"}) {
    const CorpusSizes s = sizes(corpus);
    if (s.train == 0 || s.val == 0 || s.test == 0) {
      throw ConfigError(std::string(corpus == std::string("a") ? "sizes" : "sizes_b") +
                        ": train, val and test must each hold at least one sample");
    }
    if (s.textbook == 0 && t.flags.external_knowledge && t.schedule.m > 0) {
      throw ConfigError(std::string(corpus == std::string("a") ? "sizes" : "sizes_b") +
                        ".textbook is 0 but the schedule asks for textbook pretraining");
    }
  }
  if (compare_schedules().empty()) throw ConfigError("compare.schedules is empty");
  if (compare_seeds().empty()) throw ConfigError("compare.seeds is empty");
}

std::string RunConfig::hash() const { return sha256_hex(tree.dump()); }

std::vector<std::string> leaf_keys(const ordered_json& tree) {
  std::vector<std::string> out;
  collect_leaves(tree, "", out);
  return out;
}

}  // namespace altgen
