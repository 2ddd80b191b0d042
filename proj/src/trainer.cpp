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


#include "altgen/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "altgen/errors.hpp"

namespace altgen {

std::string_view procedure_name(Procedure p) { return p == Procedure::kPretrain ? "pretrain" : "transfer"; }

void ScheduleSpec::validate() const {
  if (m + n == 0) throw ConfigError("schedule needs at least one pass per epoch (m + n >= 1)");
}

void TrainingConfig::validate() const {
  schedule.validate();
  if (!flags.external_knowledge && schedule.m > 0) {
    throw ConfigError("schedule.m = " + std::to_string(schedule.m) +
                      " asks for textbook pretraining but flags.external_knowledge is false; set schedule.m to 0");
  }
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw ConfigError("training.lambda must be finite and >= 0");
  if (!(lr > 0) || !(patch_lr >= 0)) throw ConfigError("learning rates must be positive");
  if (batch_size == 0) throw ConfigError("training.batch_size must be positive");
  if (!(clip_norm > 0)) throw ConfigError("training.clip_norm must be positive");
  if (!(dropout >= 0 && dropout < 1)) throw ConfigError("training.dropout must lie in [0, 1)");
  if (decode.max_len == 0) throw ConfigError("decode.max_len must be positive");
  if (decode.mode == DecodeMode::kBeam && decode.beam_width == 0) throw ConfigError("decode.beam_width must be positive");
}

double multitask_loss(double class_loss, double lm_loss, double lambda) { return lambda * class_loss + lm_loss; }

template <typename T>
BatchLoss<T> batch_loss(const Model<T>& model, std::span<const Sample* const> batch, double lambda,
                        const ForwardContext<T>& ctx) {
  if (batch.empty()) throw ContractError("batch is empty");
  Tensor<T> cls_sum, lm_sum;
  BatchLoss<T> out;
  double cls_total = 0, lm_total = 0;
  for (const Sample* s : batch) {
    SampleForward<T> f = model.forward(*s, ctx);
    cls_total += static_cast<double>(f.class_loss.item());
    lm_total += static_cast<double>(f.lm.total.item());
    out.tokens += f.lm.tokens;
    cls_sum = cls_sum.defined() ? add(cls_sum, f.class_loss) : f.class_loss;
    lm_sum = lm_sum.defined() ? add(lm_sum, f.lm.total) : f.lm.total;
  }
  const double b = static_cast<double>(batch.size());
  out.total = add(scale(cls_sum, static_cast<T>(lambda / b)), scale(lm_sum, static_cast<T>(1.0 / b)));
  out.class_loss = cls_total / b;
  out.lm_loss = lm_total / b;
  out.lm_token_loss = out.tokens == 0 ? 0.0 : lm_total / static_cast<double>(out.tokens);
  return out;
}

std::vector<PlanUnit> training_plan(const ScheduleSpec& schedule, const AblationFlags& flags) {
  std::vector<PlanUnit> plan;
  const std::size_t m = flags.external_knowledge ? schedule.m : 0;
  if (flags.alternate_training) {
    for (std::size_t e = 0; e < schedule.epochs; ++e) {
      for (std::size_t i = 0; i < m; ++i) plan.push_back({e, Procedure::kPretrain, i});
      for (std::size_t i = 0; i < schedule.n; ++i) plan.push_back({e, Procedure::kTransfer, i});
    }
    return plan;
  }
  std::size_t epoch = 0;
  if (m > 0) {
    for (std::size_t e = 0; e < schedule.epochs; ++e, ++epoch) {
      for (std::size_t i = 0; i < m; ++i) plan.push_back({epoch, Procedure::kPretrain, i});
    }
  }
  if (schedule.n > 0) {
    for (std::size_t e = 0; e < schedule.epochs; ++e, ++epoch) {
      for (std::size_t i = 0; i < schedule.n; ++i) plan.push_back({epoch, Procedure::kTransfer, i});
    }
  }
  return plan;
}

nlohmann::ordered_json EpochSummary::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["pretrain_loss"] = std::isnan(pretrain_loss) ? nlohmann::ordered_json() : nlohmann::ordered_json(pretrain_loss);
  j["transfer_loss"] = std::isnan(transfer_loss) ? nlohmann::ordered_json() : nlohmann::ordered_json(transfer_loss);
  j["validated"] = validated;
  if (validated) {
    j["val_class_loss"] = val_class_loss;
    j["val_lm_token_loss"] = val_lm_token_loss;
    j["val_f1"] = val_f1;
    j["val_bleu"] = val.bleu;
    j["val_rouge_l"] = val.rouge_l;
    j["val_cider_d"] = val.cider_d;
  }
  return j;
}

EpochSummary EpochSummary::from_json(const nlohmann::json& j) {
  EpochSummary s;
  s.epoch = j.at("epoch").get<std::size_t>();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  s.pretrain_loss = j.at("pretrain_loss").is_null() ? nan : j.at("pretrain_loss").get<double>();
  s.transfer_loss = j.at("transfer_loss").is_null() ? nan : j.at("transfer_loss").get<double>();
  s.validated = j.at("validated").get<bool>();
  if (s.validated) {
    s.val_class_loss = j.at("val_class_loss").get<double>();
    s.val_lm_token_loss = j.at("val_lm_token_loss").get<double>();
    s.val_f1 = j.at("val_f1").get<double>();
    s.val.bleu = j.at("val_bleu").get<std::vector<double>>();
    s.val.rouge_l = j.at("val_rouge_l").get<double>();
    s.val.cider_d = j.at("val_cider_d").get<double>();
  }
  return s;
}

nlohmann::ordered_json TrainerState::to_json() const {
  nlohmann::ordered_json j;
  j["global_step"] = global_step;
  j["unit"] = unit;
  j["batch"] = batch;
  j["order"] = order;
  j["rng"] = rng;
  j["unit_loss_sum"] = unit_loss_sum;
  j["unit_batches"] = unit_batches;
  j["epoch_pretrain_sum"] = epoch_pretrain_sum;
  j["epoch_transfer_sum"] = epoch_transfer_sum;
  j["epoch_pretrain_batches"] = epoch_pretrain_batches;
  j["epoch_transfer_batches"] = epoch_transfer_batches;
  j["best_score"] = best_score;
  j["best_epoch"] = best_epoch;
  j["epochs_since_best"] = epochs_since_best;
  j["stopped_early"] = stopped_early;
  nlohmann::ordered_json h = nlohmann::ordered_json::array();
  for (const auto& e : history) h.push_back(e.to_json());
  j["history"] = h;
  return j;
}

TrainerState TrainerState::from_json(const nlohmann::json& j) {
  TrainerState s;
  try {
    s.global_step = j.at("global_step").get<std::uint64_t>();
    s.unit = j.at("unit").get<std::size_t>();
    s.batch = j.at("batch").get<std::size_t>();
    s.order = j.at("order").get<std::vector<std::uint32_t>>();
    s.rng = j.at("rng").get<std::string>();
    s.unit_loss_sum = j.at("unit_loss_sum").get<double>();
    s.unit_batches = j.at("unit_batches").get<std::size_t>();
    s.epoch_pretrain_sum = j.at("epoch_pretrain_sum").get<double>();
    s.epoch_transfer_sum = j.at("epoch_transfer_sum").get<double>();
    s.epoch_pretrain_batches = j.at("epoch_pretrain_batches").get<std::size_t>();
    s.epoch_transfer_batches = j.at("epoch_transfer_batches").get<std::size_t>();
    s.best_score = j.at("best_score").get<double>();
    s.best_epoch = j.at("best_epoch").get<std::size_t>();
    s.epochs_since_best = j.at("epochs_since_best").get<std::size_t>();
    s.stopped_early = j.at("stopped_early").get<bool>();
    for (const auto& e : j.at("history")) s.history.push_back(EpochSummary::from_json(e));
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(IntegrityError::Kind::kCorrupt, std::string("trainer state: ") + e.what());
  }
  return s;
}

EventLog::EventLog(const std::filesystem::path& path, bool append) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  file_ = std::make_unique<std::ofstream>(path, append ? std::ios::app : std::ios::trunc);
  if (!*file_) throw IoError("cannot open event log '" + path.string() + "'");
  keep_ = false;
}

void EventLog::write(const nlohmann::ordered_json& record) {
  if (file_) {
    *file_ << record.dump() << "\n";
    file_->flush();
  }
  if (keep_) records_.push_back(record);
}

Trainer::Trainer(Model<float>& model, TrainingConfig config, const Vocabulary& vocab, EventLog* log)
    : model_(model), config_(std::move(config)), vocab_(vocab), log_(log), rng_(config_.seed) {
  config_.validate();
  plan_ = training_plan(config_.schedule, config_.flags);
}

const TrainerState& Trainer::state() const {
  std::ostringstream out;
  out << rng_;
  state_.rng = out.str();
  return state_;
}

StepResult Trainer::pretraining_step(std::span<const Sample* const> batch) { return step(Procedure::kPretrain, batch); }

StepResult Trainer::transfer_step(std::span<const Sample* const> batch) { return step(Procedure::kTransfer, batch); }

StepResult Trainer::step(Procedure procedure, std::span<const Sample* const> batch) {
  if (batch.empty()) throw ContractError(std::string(procedure_name(procedure)) + " step got an empty batch");
  if (procedure == Procedure::kPretrain && !config_.flags.external_knowledge) {
    throw ContractError("pretraining step requested with external knowledge disabled");
  }
  for (const Sample* s : batch) {
    const bool is_pretrain = s->kind == SampleKind::kPretrain && !s->has_image;
    const bool is_transfer = s->kind == SampleKind::kTransfer && s->has_image;
    if ((procedure == Procedure::kPretrain && !is_pretrain) || (procedure == Procedure::kTransfer && !is_transfer)) {
      throw ContractError("sample " + std::to_string(s->id) + " does not belong in a " +
                          std::string(procedure_name(procedure)) + " batch");
    }
  }
  auto& store = model_.parameters();
  store.zero_grad();
  ForwardContext<float> ctx;
  ctx.dropout = static_cast<float>(config_.dropout);
  ctx.rng = &rng_;
  BatchLoss<float> loss = batch_loss(model_, batch, config_.lambda, ctx);
  StepResult res;
  res.procedure = procedure;
  res.batch_size = batch.size();
  res.class_loss = loss.class_loss;
  res.lm_loss = loss.lm_loss;
  res.lm_token_loss = loss.lm_token_loss;
  res.total = static_cast<double>(loss.total.item());
  if (!std::isfinite(res.total)) {
    throw NumericError("non-finite loss at step " + std::to_string(state_.global_step) + " (" +
                       std::string(procedure_name(procedure)) + "): class " + std::to_string(res.class_loss) +
                       ", language " + std::to_string(res.lm_loss));
  }
  loss.total.backward();
  const std::vector<Parameter<float>> params = store.with_grad();
  res.grad_norm = clip_grad_norm<float>(params, config_.clip_norm);
  if (!std::isfinite(res.grad_norm)) {
    throw NumericError("non-finite gradient norm at step " + std::to_string(state_.global_step));
  }
  const double lr = config_.lr, patch_lr = config_.patch_lr;
  adam_step<float>(params, adam_, [lr, patch_lr](const std::string& name) {
    return is_patch_parameter(name) ? patch_lr : lr;
  });
  for (const auto& p : params) res.updated.push_back(p.name);
  auto& touched = procedure == Procedure::kPretrain ? pretrain_updated_ : transfer_updated_;
  touched.insert(res.updated.begin(), res.updated.end());
  return res;
}

namespace {

Dataset head(const Dataset& ds, std::size_t limit) {
  if (limit == 0 || limit >= ds.samples.size()) return ds;
  Dataset out = ds;
  out.samples.resize(limit);
  return out;
}

}  // namespace

void Trainer::finish_epoch(std::size_t epoch, const TrainingData& data, TrainingReport& report) {
  EpochSummary s;
  s.epoch = epoch;
  if (state_.epoch_pretrain_batches > 0) {
    s.pretrain_loss = state_.epoch_pretrain_sum / static_cast<double>(state_.epoch_pretrain_batches);
  }
  if (state_.epoch_transfer_batches > 0) {
    s.transfer_loss = state_.epoch_transfer_sum / static_cast<double>(state_.epoch_transfer_batches);
  }
  state_.epoch_pretrain_sum = state_.epoch_transfer_sum = 0;
  state_.epoch_pretrain_batches = state_.epoch_transfer_batches = 0;

  bool improved = false;
  if (data.val && !data.val->samples.empty()) {
    EvaluationOptions opts;
    opts.decode = config_.decode;
    const EvaluationResult ev = evaluate_model(model_, head(*data.val, config_.val_samples), vocab_, opts);
    s.validated = true;
    s.val_class_loss = ev.class_loss;
    s.val_lm_token_loss = ev.lm_token_loss;
    s.val_f1 = ev.classification.f1();
    s.val = ev.captions;
    if (s.val.cider_d > state_.best_score) {
      state_.best_score = s.val.cider_d;
      state_.best_epoch = epoch;
      state_.epochs_since_best = 0;
      improved = true;
    } else {
      ++state_.epochs_since_best;
    }
    if (config_.early_stop && state_.epochs_since_best >= config_.patience) state_.stopped_early = true;
  }
  state_.history.push_back(s);
  report.epochs = state_.history;

  nlohmann::ordered_json rec = {{"event", "epoch"}};
  rec.update(s.to_json());
  rec["global_step"] = state_.global_step;
  rec["best_epoch"] = state_.best_epoch;
  if (log_) log_->write(rec);
  if (progress_) {
    char line[256];
    if (s.validated) {
      std::snprintf(line, sizeof(line),
                    "epoch %zu  pretrain %.4f  transfer %.4f  val F1 %.4f  BLEU-4 %.4f  ROUGE-L %.4f  CIDEr-D %.4f\n",
                    epoch, s.pretrain_loss, s.transfer_loss, s.val_f1, s.val.bleu.size() > 3 ? s.val.bleu[3] : 0.0,
                    s.val.rouge_l, s.val.cider_d);
    } else {
      std::snprintf(line, sizeof(line), "epoch %zu  pretrain %.4f  transfer %.4f\n", epoch, s.pretrain_loss,
                    s.transfer_loss);
    }
    *progress_ << line << std::flush;
  }
  if (!checkpoint_dir_.empty()) {
    const CheckpointContents ck = checkpoint();
    if (improved || !data.val) save_checkpoint(checkpoint_dir_ / "best.agck", ck);
    save_checkpoint(checkpoint_dir_ / "last.agck", ck);
  }
}

TrainingReport Trainer::run(const TrainingData& data, std::optional<std::uint64_t> max_steps) {
  TrainingReport report;
  report.epochs = state_.history;
  std::uint64_t steps_this_run = 0;
  const auto start = std::chrono::steady_clock::now();
  while (state_.unit < plan_.size() && !state_.stopped_early) {
    const PlanUnit unit = plan_[state_.unit];
    const Dataset* corpus = unit.procedure == Procedure::kPretrain ? data.textbook : data.train;
    if (!corpus || corpus->samples.empty()) {
      throw ContractError(std::string(procedure_name(unit.procedure)) + " corpus is missing or empty");
    }
    const std::size_t n = corpus->samples.size();
    if (state_.batch == 0 && state_.order.empty()) {
      state_.order.resize(n);
      std::iota(state_.order.begin(), state_.order.end(), 0u);
      std::shuffle(state_.order.begin(), state_.order.end(), rng_);
      state_.unit_loss_sum = 0;
      state_.unit_batches = 0;
      if (log_) {
        log_->write({{"event", "unit_start"},
                     {"epoch", unit.epoch},
                     {"unit", state_.unit},
                     {"procedure", procedure_name(unit.procedure)},
                     {"pass", unit.pass},
                     {"samples", n}});
      }
    }
    if (state_.order.size() != n) throw ContractError("resumed sample order does not match the corpus size");
    const std::size_t batches = (n + config_.batch_size - 1) / config_.batch_size;
    while (state_.batch < batches) {
      if (max_steps && steps_this_run >= *max_steps) return report;
      std::vector<const Sample*> batch;
      for (std::size_t i = state_.batch * config_.batch_size; i < std::min(n, (state_.batch + 1) * config_.batch_size);
           ++i) {
        batch.push_back(&corpus->samples[state_.order[i]]);
      }
      const StepResult r = step(unit.procedure, batch);
      state_.unit_loss_sum += r.total;
      ++state_.unit_batches;
      if (unit.procedure == Procedure::kPretrain) {
        state_.epoch_pretrain_sum += r.total;
        ++state_.epoch_pretrain_batches;
      } else {
        state_.epoch_transfer_sum += r.total;
        ++state_.epoch_transfer_batches;
      }
      if (log_) {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        log_->write({{"event", "step"},
                     {"step", state_.global_step},
                     {"epoch", unit.epoch},
                     {"unit", state_.unit},
                     {"procedure", procedure_name(unit.procedure)},
                     {"pass", unit.pass},
                     {"batch", state_.batch},
                     {"batch_size", r.batch_size},
                     {"lambda", config_.lambda},
                     {"class_loss", r.class_loss},
                     {"lm_loss", r.lm_loss},
                     {"lm_token_loss", r.lm_token_loss},
                     {"total", r.total},
                     {"grad_norm", r.grad_norm},
                     {"updated", r.updated.size()},
                     {"wall_s", elapsed}});
      }
      ++state_.batch;
      ++state_.global_step;
      ++steps_this_run;
    }
    if (log_) {
      log_->write({{"event", "unit_end"},
                   {"epoch", unit.epoch},
                   {"unit", state_.unit},
                   {"procedure", procedure_name(unit.procedure)},
                   {"pass", unit.pass},
                   {"mean_loss", state_.unit_loss_sum / static_cast<double>(std::max<std::size_t>(1, state_.unit_batches))}});
    }
    ++state_.unit;
    state_.batch = 0;
    state_.order.clear();
    if (state_.unit == plan_.size() || plan_[state_.unit].epoch != unit.epoch) finish_epoch(unit.epoch, data, report);
  }
  report.finished = true;
  report.stopped_early = state_.stopped_early;
  report.best_epoch = state_.best_epoch;
  report.best_score = state_.best_score;
  report.pretrain_updated = pretrain_updated_;
  report.transfer_updated = transfer_updated_;
  return report;
}

CheckpointContents Trainer::checkpoint() const {
  nlohmann::ordered_json provenance = provenance_;
  return capture_checkpoint(model_, adam_, state().to_json(), std::move(provenance));
}

void Trainer::resume(const CheckpointContents& ck) {
  TrainerState s = TrainerState::from_json(ck.trainer_state);
  if (s.unit > plan_.size()) {
    throw ConfigError("checkpoint is " + std::to_string(s.unit) + " units into a plan of " +
                      std::to_string(plan_.size()));
  }
  std::mt19937_64 rng;
  std::istringstream in(s.rng);
  in >> rng;
  if (!in) throw IntegrityError(IntegrityError::Kind::kCorrupt, "checkpoint RNG state is unreadable");
  restore_checkpoint(ck, model_, &adam_);
  rng_ = rng;
  state_ = std::move(s);
}

void check_transfer_compatible(const Dataset& stage_a, const Dataset& stage_b) {
  std::vector<std::string> problems;
  if (stage_a.vocab_fingerprint != stage_b.vocab_fingerprint) problems.push_back("vocabulary fingerprints differ");
  if (stage_a.terminology_names.size() != stage_b.terminology_names.size()) {
    problems.push_back("terminology counts differ (" + std::to_string(stage_a.terminology_names.size()) + " vs " +
                       std::to_string(stage_b.terminology_names.size()) + ")");
  }
  const std::size_t n = std::min(stage_a.terminology_names.size(), stage_b.terminology_names.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (stage_a.terminology_names[i] != stage_b.terminology_names[i]) {
      problems.push_back("terminology " + std::to_string(i) + ": '" + stage_a.terminology_names[i] + "' vs '" +
                         stage_b.terminology_names[i] + "'");
    }
  }
  if (stage_a.grid_height != stage_b.grid_height || stage_a.grid_width != stage_b.grid_width ||
      stage_a.channels != stage_b.channels) {
    problems.push_back("image grid shapes differ");
  }
  if (problems.empty()) return;
  std::string msg = "stage A and stage B corpora are incompatible:";
  for (const auto& p : problems) msg += "\n  - " + p;
  throw ConfigError(msg);
}

template BatchLoss<float> batch_loss<float>(const Model<float>&, std::span<const Sample* const>, double,
                                            const ForwardContext<float>&);
template BatchLoss<double> batch_loss<double>(const Model<double>&, std::span<const Sample* const>, double,
                                              const ForwardContext<double>&);

}  // namespace altgen
