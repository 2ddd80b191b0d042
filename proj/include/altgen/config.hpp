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


// Run configuration: a nested JSON document where every field has a default.
// Files and --dotted.key flags overlay onto the defaults in that order.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "altgen/grammar.hpp"
#include "altgen/model.hpp"
#include "altgen/trainer.hpp"
#include "json.hpp"

namespace altgen {

struct RunConfig {
  nlohmann::ordered_json tree;

  // Every key with its default value.
  static const nlohmann::ordered_json& defaults();
  static RunConfig make_default() { return RunConfig{defaults()}; }

  // Overlays `overlay` onto this tree. Unknown keys and type changes are
  // ConfigErrors that name the offending key.
  void merge(const nlohmann::json& overlay, const std::string& source);
  void merge_file(const std::filesystem::path& path);
  // Parses `text` according to the type of the existing leaf at `dotted_key`.
  void set(const std::string& dotted_key, const std::string& text);

  // Checked view of the whole tree; throws ConfigError with an actionable
  // message on invalid values or combinations.
  void validate() const;

  std::uint64_t seed() const;
  std::filesystem::path out_dir() const;
  std::filesystem::path data_dir() const { return out_dir() / "data"; }
  std::string target_corpus() const;

  CorpusSizes sizes(const std::string& corpus) const;
  SyntheticGrammar grammar(const std::string& corpus) const;
  ModelConfig model() const;  // data-dependent fields left at their defaults
  TrainingConfig training() const;
  TrainingConfig stage_b_training() const;
  std::vector<std::pair<std::size_t, std::size_t>> compare_schedules() const;
  std::vector<std::uint64_t> compare_seeds() const;

  std::string dump() const { return tree.dump(2) + "\n"; }
  // SHA-256 of the compact dump.
  std::string hash() const;
};

// "1,3" -> (1, 3)
std::pair<std::size_t, std::size_t> parse_schedule(const std::string& text);
// "1,1;1,3" -> [(1,1), (1,3)]
std::vector<std::pair<std::size_t, std::size_t>> parse_schedule_list(const std::string& text);

// Every leaf of `tree` as a dotted key, in document order.
std::vector<std::string> leaf_keys(const nlohmann::ordered_json& tree);

}  // namespace altgen
