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


// Training: the multitask loss, one optimizer step per homogeneous batch for
// each procedure (textbook pretraining, image transfer), and the epoch
// schedule interleaving m pretraining passes with n transfer passes.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "altgen/adam.hpp"
#include "altgen/checkpoint.hpp"
#include "altgen/dataset.hpp"
#include "altgen/evaluation.hpp"
#include "altgen/model.hpp"
#include "json.hpp"

namespace altgen {

enum class Procedure : std::uint8_t { kPretrain = 0, kTransfer = 1 };

std::string_view procedure_name(Procedure p);

struct ScheduleSpec {
  std::size_t m = 1;  // pretraining passes per epoch
  std::size_t n = 3;  // transfer passes per epoch
  std::size_t epochs = 30;

  void validate() const;
};

struct AblationFlags {
  bool alternate_training = true;
  bool transfer_learning = false;
  bool external_knowledge = true;
};

struct TrainingConfig {
  ScheduleSpec schedule;
  AblationFlags flags;
  double lambda = 1.0;
  double lr = 1e-3;
  double patch_lr = 1e-6;
  std::size_t batch_size = 8;
  double clip_norm = 1.0;
  double dropout = 0.0;
  bool early_stop = false;
  std::size_t patience = 5;
  std::size_t val_samples = 0;  // 0 = whole validation split
  DecodeOptions decode;
  std::uint64_t seed = 1;

  // ConfigError on invalid combinations, e.g. m > 0 without external knowledge.
  void validate() const;
};

// lambda * class_loss + lm_loss.
double multitask_loss(double class_loss, double lm_loss, double lambda);

template <typename T>
struct BatchLoss {
  Tensor<T> total;         // lambda * mean class loss + mean summed NLL
  double class_loss = 0;   // batch mean
  double lm_loss = 0;      // batch mean of per-sample summed NLL
  double lm_token_loss = 0;
  std::size_t tokens = 0;
};

// Builds the differentiable batch objective.
template <typename T>
BatchLoss<T> batch_loss(const Model<T>& model, std::span<const Sample* const> batch, double lambda,
                        const ForwardContext<T>& ctx = {});

struct StepResult {
  Procedure procedure = Procedure::kTransfer;
  std::size_t batch_size = 0;
  double class_loss = 0;
  double lm_loss = 0;
  double lm_token_loss = 0;
  double total = 0;
  double grad_norm = 0;
  std::vector<std::string> updated;  // parameters that received a gradient
};

// One unit of the plan: a full pass of one procedure over its corpus.
struct PlanUnit {
  std::size_t epoch = 0;
  Procedure procedure = Procedure::kTransfer;
  std::size_t pass = 0;  // index within the epoch for this procedure
};

std::vector<PlanUnit> training_plan(const ScheduleSpec& schedule, const AblationFlags& flags);

struct EpochSummary {
  std::size_t epoch = 0;
  double pretrain_loss = std::numeric_limits<double>::quiet_NaN();
  double transfer_loss = std::numeric_limits<double>::quiet_NaN();
  bool validated = false;
  double val_class_loss = 0;
  double val_lm_token_loss = 0;
  double val_f1 = 0;
  CaptionMetrics val;

  nlohmann::ordered_json to_json() const;
  static EpochSummary from_json(const nlohmann::json& j);
};

struct TrainerState {
  std::uint64_t global_step = 0;
  std::size_t unit = 0;   // next plan unit
  std::size_t batch = 0;  // next batch within that unit
  std::vector<std::uint32_t> order;  // sample order of the current unit
  std::string rng;
  double unit_loss_sum = 0;
  std::size_t unit_batches = 0;
  double epoch_pretrain_sum = 0, epoch_transfer_sum = 0;
  std::size_t epoch_pretrain_batches = 0, epoch_transfer_batches = 0;
  double best_score = -1;
  std::size_t best_epoch = 0;
  std::size_t epochs_since_best = 0;
  bool stopped_early = false;
  std::vector<EpochSummary> history;

  nlohmann::ordered_json to_json() const;
  static TrainerState from_json(const nlohmann::json& j);
};

// Line-delimited JSON records, optionally mirrored to memory.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(const std::filesystem::path& path, bool append = false);

  void write(const nlohmann::ordered_json& record);
  const std::vector<nlohmann::ordered_json>& records() const { return records_; }
  void keep_in_memory(bool keep) { keep_ = keep; }

 private:
  std::unique_ptr<std::ofstream> file_;
  bool keep_ = true;
  std::vector<nlohmann::ordered_json> records_;
};

struct TrainingData {
  const Dataset* textbook = nullptr;  // pretraining corpus
  const Dataset* train = nullptr;     // transfer corpus
  const Dataset* val = nullptr;       // optional; enables per-epoch validation
};

struct TrainingReport {
  std::vector<EpochSummary> epochs;
  std::set<std::string> pretrain_updated;
  std::set<std::string> transfer_updated;
  std::size_t best_epoch = 0;
  double best_score = -1;
  bool stopped_early = false;
  bool finished = false;
};

class Trainer {
 public:
  Trainer(Model<float>& model, TrainingConfig config, const Vocabulary& vocab, EventLog* log = nullptr);

  const TrainingConfig& config() const { return config_; }
  AdamState<float>& optimizer() { return adam_; }
  const TrainerState& state() const;

  StepResult pretraining_step(std::span<const Sample* const> batch);
  StepResult transfer_step(std::span<const Sample* const> batch);

  // Runs the plan from the current state. Stops early after `max_steps`
  // optimizer steps when given, leaving the state resumable.
  TrainingReport run(const TrainingData& data, std::optional<std::uint64_t> max_steps = std::nullopt);

  // Directory for last.agck / best.agck written at epoch ends; empty disables.
  void set_checkpoint_dir(std::filesystem::path dir) { checkpoint_dir_ = std::move(dir); }
  void set_provenance(nlohmann::ordered_json provenance) { provenance_ = std::move(provenance); }
  void set_progress(std::ostream* progress) { progress_ = progress; }

  CheckpointContents checkpoint() const;
  // Restores parameters, optimizer and schedule position.
  void resume(const CheckpointContents& ck);

 private:
  StepResult step(Procedure procedure, std::span<const Sample* const> batch);
  void finish_epoch(std::size_t epoch, const TrainingData& data, TrainingReport& report);

  Model<float>& model_;
  TrainingConfig config_;
  const Vocabulary& vocab_;
  EventLog* log_;
  AdamState<float> adam_;
  std::mt19937_64 rng_;
  mutable TrainerState state_;
  std::vector<PlanUnit> plan_;
  std::filesystem::path checkpoint_dir_;
  nlohmann::ordered_json provenance_ = nlohmann::ordered_json::object();
  std::ostream* progress_ = nullptr;
  std::set<std::string> pretrain_updated_, transfer_updated_;
};

// Stage A/B compatibility: same vocabulary fingerprint and terminology list.
// ConfigError naming every mismatch otherwise.
void check_transfer_compatible(const Dataset& stage_a, const Dataset& stage_b);

}  // namespace altgen
