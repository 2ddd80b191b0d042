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


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "altgen/checkpoint.hpp"
#include "altgen/errors.hpp"
#include "altgen/grammar.hpp"
#include "altgen/trainer.hpp"

namespace altgen {
namespace {

namespace fs = std::filesystem;

struct TinyData {
  SyntheticGrammar grammar = default_grammar(4, 3, 0);
  Vocabulary vocab;
  Dataset textbook, train, val;

  TinyData() {
    const RawCorpus raw = generate_corpus(grammar, {12, 16, 4, 4});
    std::vector<std::vector<std::string>> s;
    for (const auto& r : raw.train) s.push_back(split_words(r.text));
    for (const auto& r : raw.textbook) s.push_back(split_words(r.text));
    vocab = Vocabulary::build(s);
    textbook = tokenize_split("textbook", raw.textbook, vocab, grammar);
    train = tokenize_split("train", raw.train, vocab, grammar);
    val = tokenize_split("val", raw.val, vocab, grammar);
  }

  ModelConfig model_config() const {
    ModelConfig c;
    c.model_dim = 16;
    c.num_heads = 2;
    c.encoder_layers = 1;
    c.decoder_layers = 1;
    c.ffn_dim = 32;
    c.term_dim = 8;
    c.visual_dim = 8;
    c.text_dim = 8;
    c.vocab_size = vocab.size();
    c.terminology_names = grammar.terminology_names();
    return c;
  }
};

const TinyData& tiny() {
  static const TinyData data;
  return data;
}

TrainingConfig fast_config(std::size_t m, std::size_t n, std::size_t epochs) {
  TrainingConfig c;
  c.schedule = {m, n, epochs};
  c.lr = 1e-3;
  c.batch_size = 4;
  c.decode.max_len = 24;
  return c;
}

TEST(Plan, AlternatingOrderPerEpoch) {
  const auto plan = training_plan({1, 3, 2}, {});
  ASSERT_EQ(plan.size(), 8u);
  for (std::size_t e = 0; e < 2; ++e) {
    EXPECT_EQ(plan[e * 4].procedure, Procedure::kPretrain);
    for (std::size_t i = 1; i < 4; ++i) {
      EXPECT_EQ(plan[e * 4 + i].procedure, Procedure::kTransfer);
      EXPECT_EQ(plan[e * 4 + i].pass, i - 1);
      EXPECT_EQ(plan[e * 4 + i].epoch, e);
    }
  }
}

TEST(Plan, SequentialRunsAllPretrainingFirst) {
  AblationFlags flags;
  flags.alternate_training = false;
  const auto plan = training_plan({1, 2, 3}, flags);
  ASSERT_EQ(plan.size(), 9u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(plan[i].procedure, Procedure::kPretrain);
  for (std::size_t i = 3; i < 9; ++i) EXPECT_EQ(plan[i].procedure, Procedure::kTransfer);
  EXPECT_EQ(plan.back().epoch, 5u);
}

TEST(Plan, ExternalKnowledgeOffDropsPretraining) {
  AblationFlags flags;
  flags.external_knowledge = false;
  for (const auto& u : training_plan({0, 2, 2}, flags)) EXPECT_EQ(u.procedure, Procedure::kTransfer);
  TrainingConfig c;
  c.flags = flags;
  c.schedule = {1, 3, 1};
  EXPECT_THROW(c.validate(), ConfigError);
  c.schedule = {0, 0, 1};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Loss, BatchTotalIsWeightedSum) {
  const auto& d = tiny();
  const Model<double> model = Model<double>::create(d.model_config(), 5);
  std::vector<const Sample*> batch{&d.train.samples[0], &d.train.samples[1], &d.textbook.samples[0]};
  for (double lambda : {0.0, 0.5, 1.0, 3.0}) {
    const auto l = batch_loss(model, batch, lambda);
    EXPECT_NEAR(l.total.item(), multitask_loss(l.class_loss, l.lm_loss, lambda), 1e-10);
    double cls = 0, lm = 0;
    for (const Sample* s : batch) {
      const auto f = model.forward(*s);
      cls += f.class_loss.item();
      lm += f.lm.total.item();
    }
    EXPECT_NEAR(l.class_loss, cls / 3, 1e-12);
    EXPECT_NEAR(l.lm_loss, lm / 3, 1e-12);
  }
}

TEST(Loss, ZeroLambdaGivesExactlyZeroClassifierGradient) {
  const auto& d = tiny();
  Model<float> model = Model<float>::create(d.model_config(), 5);
  std::vector<const Sample*> batch{&d.train.samples[0], &d.train.samples[1]};
  model.parameters().zero_grad();
  batch_loss(model, batch, 0.0).total.backward();
  for (const char* name : {"classifier.w", "classifier.b"}) {
    const auto t = model.parameters().get(name);
    ASSERT_TRUE(t.has_grad());
    for (float g : t.grad()) EXPECT_EQ(g, 0.0f);
  }
}

std::set<std::string> names_where(const Model<float>& model, bool (*keep)(const std::string&)) {
  std::set<std::string> out;
  for (const auto& n : model.parameters().names()) {
    if (keep(n)) out.insert(n);
  }
  return out;
}

TEST(Trainer, DegenerateSchedulesTouchExpectedParameters) {
  const auto& d = tiny();
  TrainingData data{&d.textbook, &d.train, nullptr};

  Model<float> pre_model = Model<float>::create(d.model_config(), 1);
  Trainer pre(pre_model, fast_config(1, 0, 1), d.vocab);
  const TrainingReport a = pre.run(data);
  EXPECT_TRUE(a.transfer_updated.empty());
  EXPECT_EQ(a.pretrain_updated, names_where(pre_model, [](const std::string& n) { return !is_visual_parameter(n); }));

  Model<float> tr_model = Model<float>::create(d.model_config(), 1);
  Trainer tr(tr_model, fast_config(0, 1, 1), d.vocab);
  const TrainingReport b = tr.run(data);
  EXPECT_TRUE(b.pretrain_updated.empty());
  EXPECT_EQ(b.transfer_updated, names_where(tr_model, [](const std::string& n) { return !is_textual_parameter(n); }));

  std::set<std::string> dec_a, dec_b;
  for (const auto& n : a.pretrain_updated) {
    if (n.rfind("decoder.", 0) == 0) dec_a.insert(n);
  }
  for (const auto& n : b.transfer_updated) {
    if (n.rfind("decoder.", 0) == 0) dec_b.insert(n);
  }
  EXPECT_FALSE(dec_a.empty());
  EXPECT_EQ(dec_a, dec_b);
  std::set<std::string> shared;
  for (const auto& n : a.pretrain_updated) {
    if (b.transfer_updated.count(n)) shared.insert(n);
  }
  EXPECT_EQ(shared, names_where(tr_model, [](const std::string& n) { return is_shared_parameter(n); }));
}

TEST(Trainer, EventLogRecordsScheduleAndLossBookkeeping) {
  const auto& d = tiny();
  Model<float> model = Model<float>::create(d.model_config(), 2);
  EventLog log;
  Trainer trainer(model, fast_config(1, 3, 2), d.vocab, &log);
  trainer.run({&d.textbook, &d.train, nullptr});
  std::vector<std::pair<std::size_t, std::string>> units;
  std::size_t steps = 0;
  for (const auto& r : log.records()) {
    if (r["event"] == "unit_start") units.emplace_back(r["epoch"].get<std::size_t>(), r["procedure"].get<std::string>());
    if (r["event"] == "step") {
      ++steps;
      const double total = r["total"], cls = r["class_loss"], lm = r["lm_loss"], lambda = r["lambda"];
      EXPECT_NEAR(total, lambda * cls + lm, 1e-6 * std::max(1.0, std::abs(total)));
    }
  }
  const std::vector<std::pair<std::size_t, std::string>> expect{
      {0, "pretrain"}, {0, "transfer"}, {0, "transfer"}, {0, "transfer"},
      {1, "pretrain"}, {1, "transfer"}, {1, "transfer"}, {1, "transfer"}};
  EXPECT_EQ(units, expect);
  EXPECT_EQ(steps, 2u * (3 + 3 * 4));
}

TEST(Trainer, PatchLearningRateAppliesToPatchOnly) {
  const auto& d = tiny();
  Model<float> model = Model<float>::create(d.model_config(), 3);
  const std::vector<float> patch_before(model.parameters().get("visual.patch.w").values().begin(),
                                        model.parameters().get("visual.patch.w").values().end());
  const std::vector<float> proj_before(model.parameters().get("visual.proj.w").values().begin(),
                                       model.parameters().get("visual.proj.w").values().end());
  auto cfg = fast_config(0, 1, 1);
  cfg.patch_lr = 0.0;
  Trainer trainer(model, cfg, d.vocab);
  std::vector<const Sample*> batch{&d.train.samples[0], &d.train.samples[1]};
  trainer.transfer_step(batch);
  const auto patch = model.parameters().get("visual.patch.w").values();
  const auto proj = model.parameters().get("visual.proj.w").values();
  EXPECT_TRUE(std::equal(patch.begin(), patch.end(), patch_before.begin()));
  EXPECT_FALSE(std::equal(proj.begin(), proj.end(), proj_before.begin()));
}

TEST(Trainer, WrongSampleKindIsRejected) {
  const auto& d = tiny();
  Model<float> model = Model<float>::create(d.model_config(), 3);
  Trainer trainer(model, fast_config(1, 1, 1), d.vocab);
  std::vector<const Sample*> batch{&d.textbook.samples[0]};
  EXPECT_THROW(trainer.transfer_step(batch), ContractError);
}

TEST(Trainer, NonFiniteLossIsNumericError) {
  const auto& d = tiny();
  Model<float> model = Model<float>::create(d.model_config(), 3);
  model.parameters().get("classifier.b").mutable_values()[0] = NAN;
  Trainer trainer(model, fast_config(0, 1, 1), d.vocab);
  std::vector<const Sample*> batch{&d.train.samples[0]};
  EXPECT_THROW(trainer.transfer_step(batch), NumericError);
}

std::vector<float> flat_values(const Model<float>& m) {
  std::vector<float> out;
  for (const auto& p : m.parameters().all()) out.insert(out.end(), p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

TEST(Trainer, ResumeFromCheckpointIsBitwiseIdentical) {
  const auto& d = tiny();
  const TrainingData data{&d.textbook, &d.train, &d.val};
  const auto cfg = fast_config(1, 2, 2);

  Model<float> full = Model<float>::create(d.model_config(), 4);
  Trainer t_full(full, cfg, d.vocab);
  const auto report_full = t_full.run(data);

  Model<float> part = Model<float>::create(d.model_config(), 4);
  Trainer t_part(part, cfg, d.vocab);
  t_part.run(data, 7);  // stops mid-unit
  const std::string bytes = serialize_checkpoint(t_part.checkpoint());

  const CheckpointContents ck = parse_checkpoint(bytes);
  Model<float> resumed = model_from_checkpoint(ck);
  Trainer t_res(resumed, cfg, d.vocab);
  t_res.resume(ck);
  const auto report_res = t_res.run(data);

  EXPECT_EQ(flat_values(full), flat_values(resumed));
  ASSERT_EQ(report_full.epochs.size(), report_res.epochs.size());
  for (std::size_t e = 0; e < report_full.epochs.size(); ++e) {
    EXPECT_EQ(report_full.epochs[e].transfer_loss, report_res.epochs[e].transfer_loss);
    EXPECT_EQ(report_full.epochs[e].val.cider_d, report_res.epochs[e].val.cider_d);
  }
  EXPECT_EQ(serialize_checkpoint(t_full.checkpoint()), serialize_checkpoint(t_res.checkpoint()));
}

TEST(Checkpoint, FileRoundTripAndCorruption) {
  const auto& d = tiny();
  Model<float> model = Model<float>::create(d.model_config(), 6);
  Trainer trainer(model, fast_config(0, 1, 1), d.vocab);
  std::vector<const Sample*> batch{&d.train.samples[0]};
  trainer.transfer_step(batch);
  const CheckpointContents ck = trainer.checkpoint();
  const std::string bytes = serialize_checkpoint(ck);
  const fs::path p = fs::temp_directory_path() / "altgen_ck_test.agck";
  save_checkpoint(p, ck);
  EXPECT_EQ(serialize_checkpoint(load_checkpoint(p)), bytes);
  fs::remove(p);

  auto kind = [](const std::string& b) {
    try {
      parse_checkpoint(b);
    } catch (const IntegrityError& e) {
      return e.kind();
    }
    return IntegrityError::Kind::kCorrupt;
  };
  std::string bad = bytes;
  bad[1] = '?';
  EXPECT_EQ(kind(bad), IntegrityError::Kind::kBadMagic);
  EXPECT_EQ(kind(bytes.substr(0, 40)), IntegrityError::Kind::kTruncated);
  bad = bytes;
  bad[bytes.size() / 2] ^= 0x10;
  EXPECT_EQ(kind(bad), IntegrityError::Kind::kHashMismatch);
}

TEST(Checkpoint, ShapeMismatchLeavesModelUntouched) {
  const auto& d = tiny();
  Model<float> source = Model<float>::create(d.model_config(), 7);
  auto other_cfg = d.model_config();
  other_cfg.ffn_dim = 16;
  Model<float> target = Model<float>::create(other_cfg, 8);
  const auto before = flat_values(target);
  AdamState<float> adam;
  try {
    restore_checkpoint(capture_checkpoint(source, adam, {}, {}), target, nullptr);
    ADD_FAILURE() << "restore accepted a mismatched checkpoint";
  } catch (const IntegrityError& e) {
    EXPECT_EQ(e.kind(), IntegrityError::Kind::kShapeMismatch);
  }
  EXPECT_EQ(flat_values(target), before);
}

TEST(Transfer, CompatibilityCheckNamesMismatches) {
  const auto& d = tiny();
  Dataset other = d.train;
  EXPECT_NO_THROW(check_transfer_compatible(d.train, other));
  other.vocab_fingerprint = "x";
  other.terminology_names[1] = "something else";
  try {
    check_transfer_compatible(d.train, other);
    ADD_FAILURE();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("vocabulary"), std::string::npos);
    EXPECT_NE(msg.find("something else"), std::string::npos);
  }
}

}  // namespace
}  // namespace altgen
