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


// Command-line surface. Every subcommand reads the defaults, overlays
// --config FILE and then any --dotted.key VALUE flags, validates, and only
// then touches the filesystem.
//
// Files under --out-dir:
//   data/vocab.txt                    shared vocabulary of both corpora
//   data/{a,b}/grammar.json
//   data/{a,b}/{textbook,train,val,test}.agds (+ .jsonl sidecars)
//   train/                            events.jsonl, best.agck, last.agck,
//                                     test_pairs.jsonl, test_metrics.json
//   compare/, ablate/, eval/, attention/

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "altgen/config.hpp"
#include "altgen/dataset.hpp"
#include "altgen/evaluation.hpp"
#include "altgen/trainer.hpp"
#include "altgen/vocabulary.hpp"

namespace altgen::cli {

// Runs one command in-process; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args);

struct CorpusFiles {
  Dataset textbook, train, val, test;

  const Dataset& split(const std::string& name) const;
};

struct GeneratedData {
  Vocabulary vocab;
  CorpusFiles a, b;
  std::vector<std::pair<std::string, std::string>> file_hashes;  // relative path, sha256
};

// Generates both corpora, builds the vocabulary from their training text and
// writes everything under config.data_dir().
GeneratedData generate_data(const RunConfig& config);

Vocabulary load_vocabulary(const RunConfig& config);
CorpusFiles load_corpus(const RunConfig& config, const std::string& corpus);

struct RunOutcome {
  TrainingReport stage_a;  // empty unless transfer learning is on
  TrainingReport report;
  EvaluationResult test;
  std::filesystem::path dir;
};

// Trains one model into `dir` (two stages when flags.transfer_learning) and
// scores its best checkpoint on the target corpus' test split.
RunOutcome train_run(const RunConfig& config, const std::filesystem::path& dir, std::ostream* progress);

// Mean and sample standard deviation of each metric over seeds, one row per
// schedule in the given order.
std::string schedule_table(const std::vector<std::pair<std::size_t, std::size_t>>& schedules,
                           const std::vector<std::vector<EvaluationResult>>& results);

struct AblationRow {
  AblationFlags flags;
  EvaluationResult result;
};

std::string ablation_table(const std::vector<AblationRow>& rows);

}  // namespace altgen::cli
