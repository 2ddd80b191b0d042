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


// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance [--criterion N] [--work-dir DIR]

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "altgen/binary_io.hpp"
#include "altgen/checkpoint.hpp"
#include "altgen/cli.hpp"
#include "altgen/errors.hpp"
#include "altgen/metrics.hpp"
#include "altgen/trainer.hpp"
#include "metric_oracles.hpp"
#include "support.hpp"

namespace altgen {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Small real corpus from a four-term grammar, tokenized in memory.
struct TinyCorpus {
  SyntheticGrammar grammar = default_grammar(4, 3, 0);
  Vocabulary vocab;
  Dataset textbook, train, val;

  TinyCorpus() {
    const RawCorpus raw = generate_corpus(grammar, {12, 16, 4, 4});
    std::vector<std::vector<std::string>> s;
    for (const auto& r : raw.train) s.push_back(split_words(r.text));
    for (const auto& r : raw.textbook) s.push_back(split_words(r.text));
    vocab = Vocabulary::build(s);
    textbook = tokenize_split("textbook", raw.textbook, vocab, grammar);
    train = tokenize_split("train", raw.train, vocab, grammar);
    val = tokenize_split("val", raw.val, vocab, grammar);
  }

  ModelConfig model() const {
    ModelConfig c = testing::tiny_model_config();
    c.model_dim = 16;
    c.ffn_dim = 32;
    c.max_len = 64;
    c.embed_stddev = 0.02;
    c.vocab_size = vocab.size();
    c.terminology_names = grammar.terminology_names();
    c.grid_height = 7;
    c.grid_width = 7;
    c.grid_channels = 4;
    return c;
  }
};

TrainingConfig quick_training(std::size_t m, std::size_t n, std::size_t epochs, double lambda = 1.0) {
  TrainingConfig c;
  c.schedule = {m, n, epochs};
  c.lambda = lambda;
  c.lr = 1e-3;
  c.batch_size = 4;
  c.decode.max_len = 24;
  return c;
}

// 1. Finite differences on every parameter of the tiny model.
Outcome gradient_correctness() {
  const auto start = Clock::now();
  const ModelConfig cfg = testing::tiny_model_config();
  Model<double> m64 = Model<double>::create(cfg, 17);
  Model<float> m32 = Model<float>::create(cfg, 17);
  for (std::size_t i = 0; i < m32.parameters().size(); ++i) {
    auto src = m32.parameters().all()[i].tensor.values();
    auto dst = Tensor<double>(m64.parameters().all()[i].tensor).mutable_values();
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = src[k];
  }

  std::mt19937_64 rng(5);
  std::normal_distribution<float> nd(0.0f, 1.0f);
  Sample visual;
  visual.id = 0;
  visual.kind = SampleKind::kTransfer;
  visual.has_image = true;
  visual.image = ImageGrid::zeros(3, 3, 2);
  for (auto& v : visual.image.values) v = nd(rng);
  visual.labels = {1, 0, 1};
  visual.tokens = {kBos, 5, 7, 9, 11, 4, kEos};
  Sample text;
  text.id = 1;
  text.kind = SampleKind::kPretrain;
  text.labels = {0, 1, 0};
  text.tokens = {kBos, 6, 8, 10, kEos};
  const std::vector<const Sample*> batch{&visual, &text};
  const double lambda = 0.7;

  std::vector<Tensor<double>> params;
  for (const auto& p : m64.parameters().all()) params.push_back(p.tensor);
  const auto r64 = testing::grad_check(params, [&] { return batch_loss(m64, batch, lambda).total; });

  // 32-bit: tape gradients of the float model against central differences of
  // the bit-identical double model.
  m32.parameters().zero_grad();
  batch_loss(m32, batch, lambda).total.backward();
  m64.parameters().zero_grad();
  double max32 = 0;
  std::size_t without_grad = 0;
  for (std::size_t i = 0; i < m32.parameters().size(); ++i) {
    const auto& p32 = m32.parameters().all()[i];
    if (!p32.tensor.has_grad()) {
      ++without_grad;
      continue;
    }
    Tensor<double> t = m64.parameters().all()[i].tensor;
    auto values = t.mutable_values();
    const std::function<double()> f = [&] { return batch_loss(m64, batch, lambda).total.item(); };
    for (std::size_t k = 0; k < values.size(); ++k) {
      max32 = std::max(max32, testing::rel_err(p32.tensor.grad()[k], testing::numeric_derivative(values[k], f)));
    }
  }
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = r64.max_rel_err <= 1e-6 && max32 <= 1e-3 && without_grad == 0 && secs < 120;
  o.detail = "max rel err " + sci(r64.max_rel_err) + " (64-bit, <= 1e-6), " + sci(max32) + " (32-bit, <= 1e-3) over " +
             std::to_string(r64.checked) + " values in " + std::to_string(m64.parameters().size()) +
             " tensors; tensors without gradient " + std::to_string(without_grad) + "; " + fixed(secs, 1) + " s";
  return o;
}

// 2. Metric implementations against brute-force oracles.
Outcome metric_equivalence() {
  const auto start = Clock::now();
  double worst = 0;
  const int corpora = 200;
  for (int seed = 0; seed < corpora; ++seed) {
    const auto corpus = oracle::random_corpus(static_cast<std::uint64_t>(seed));
    const auto b = bleu(corpus).scores, ob = oracle::bleu(corpus);
    for (std::size_t n = 0; n < 4; ++n) worst = std::max(worst, std::abs(b[n] - ob[n]));
    worst = std::max(worst, std::abs(rouge_l(corpus) - oracle::rouge_l(corpus)));
    const auto c = cider_d_scores(corpus), oc = oracle::cider_d(corpus);
    for (std::size_t i = 0; i < c.size(); ++i) worst = std::max(worst, std::abs(c[i] - oc[i]));
  }
  auto w = [](const std::string& s) { return split_words(s); };
  const std::vector<EvalPair> same{{"0", w("the heart size is normal ."), {w("the heart size is normal .")}},
                                   {"1", w("a nodule is seen ."), {w("a nodule is seen .")}}};
  const auto bs = bleu(same).scores;
  const bool identical = bs[0] == 1.0 && bs[3] == 1.0 && rouge_l(same) == 1.0;
  const std::vector<EvalPair> sevens{{"0", w("the the the the the the the"), {w("the cat is on the mat")}}};
  const double p1 = bleu(sevens).precisions[0];
  const std::vector<EvalPair> cider_case{
      {"0", w("there is a small nodule in the left lung ."), {w("there is a small nodule in the left lung .")}},
      {"1", w("the heart size is normal ."), {w("the lungs are clear and the heart size is normal .")}},
      {"2", w("pleural effusion is seen ."), {w("a large pleural effusion is seen on the right .")}}};
  const double cider_self = cider_d_scores(cider_case)[0];
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = worst <= 1e-6 && identical && std::abs(p1 - 2.0 / 7.0) <= 1e-12 && std::abs(cider_self - 10.0) <= 1e-6 &&
           secs < 30;
  o.detail = std::to_string(corpora) + " random corpora, max |delta| " + sci(worst) + "; identical corpus BLEU-1/4 " +
             fixed(bs[0]) + "/" + fixed(bs[3]) + ", ROUGE-L " + fixed(rouge_l(same)) + "; clipped unigram precision " +
             fixed(p1, 6) + " (2/7); self CIDEr-D " + fixed(cider_self, 6) + "; " + fixed(secs, 1) + " s";
  return o;
}

// 3. Logged totals equal lambda * L_cls + L_T; lambda = 0 zeroes the head.
Outcome loss_bookkeeping() {
  const TinyCorpus data;
  double worst_rel = 0, worst_abs64 = 0;
  std::size_t steps = 0;
  for (double lambda : {0.0, 0.7, 1.0, 2.5}) {
    Model<float> model = Model<float>::create(data.model(), 3);
    EventLog log;
    Trainer trainer(model, quick_training(1, 3, 1, lambda), data.vocab, &log);
    trainer.run({&data.textbook, &data.train, nullptr});
    for (const auto& r : log.records()) {
      if (r["event"] != "step") continue;
      ++steps;
      const double total = r["total"], cls = r["class_loss"], lm = r["lm_loss"];
      worst_rel = std::max(worst_rel, std::abs(total - (lambda * cls + lm)) / std::max(1.0, std::abs(total)));
    }
    // 64-bit re-evaluation of the same identity.
    const Model<double> m64 = Model<double>::create(data.model(), 3);
    const std::vector<const Sample*> batch{&data.train.samples[0], &data.train.samples[1], &data.train.samples[2]};
    const auto l = batch_loss(m64, batch, lambda);
    worst_abs64 = std::max(worst_abs64, std::abs(l.total.item() - (lambda * l.class_loss + l.lm_loss)));
  }
  Model<float> model = Model<float>::create(data.model(), 4);
  const std::vector<const Sample*> batch{&data.train.samples[0], &data.train.samples[1]};
  model.parameters().zero_grad();
  batch_loss(model, batch, 0.0).total.backward();
  double head_grad = 0;
  bool has_grad = true;
  for (const char* name : {"classifier.w", "classifier.b"}) {
    const auto t = model.parameters().get(name);
    has_grad = has_grad && t.has_grad();
    for (float g : t.grad()) head_grad = std::max(head_grad, static_cast<double>(std::abs(g)));
  }
  Outcome o;
  o.pass = steps > 0 && worst_rel <= 1e-6 && worst_abs64 <= 1e-6 && has_grad && head_grad == 0.0;
  o.detail = std::to_string(steps) + " logged steps, max |total - (lambda*L_cls + L_T)| / max(1,|total|) " +
             sci(worst_rel) + " (32-bit), " + sci(worst_abs64) + " absolute (64-bit); lambda=0 head gradient max " +
             sci(head_grad);
  return o;
}

// 4. Schedule order in the event log and the parameter sets each procedure updates.
Outcome schedule_contract() {
  const TinyCorpus data;
  std::vector<std::string> problems;
  for (const auto& [m, n] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 3}, {2, 1}, {1, 5}}) {
    Model<float> model = Model<float>::create(data.model(), 5);
    EventLog log;
    Trainer trainer(model, quick_training(m, n, 2), data.vocab, &log);
    trainer.run({&data.textbook, &data.train, nullptr});
    std::vector<std::pair<std::size_t, std::string>> seen, expect;
    for (std::size_t e = 0; e < 2; ++e) {
      for (std::size_t i = 0; i < m; ++i) expect.emplace_back(e, "pretrain");
      for (std::size_t i = 0; i < n; ++i) expect.emplace_back(e, "transfer");
    }
    for (const auto& r : log.records()) {
      if (r["event"] == "unit_start") seen.emplace_back(r["epoch"].get<std::size_t>(), r["procedure"].get<std::string>());
    }
    if (seen != expect) problems.push_back("order wrong for (" + std::to_string(m) + "," + std::to_string(n) + ")");
  }

  auto all_names = [](const Model<float>& model, bool (*keep)(const std::string&)) {
    std::set<std::string> out;
    for (const auto& name : model.parameters().names()) {
      if (keep(name)) out.insert(name);
    }
    return out;
  };
  Model<float> pm = Model<float>::create(data.model(), 6);
  const TrainingReport pre = Trainer(pm, quick_training(1, 0, 1), data.vocab).run({&data.textbook, &data.train, nullptr});
  Model<float> tm = Model<float>::create(data.model(), 6);
  const TrainingReport tr = Trainer(tm, quick_training(0, 1, 1), data.vocab).run({&data.textbook, &data.train, nullptr});
  if (!pre.transfer_updated.empty() ||
      pre.pretrain_updated != all_names(pm, [](const std::string& s) { return !is_visual_parameter(s); })) {
    problems.push_back("(1,0) touched an unexpected parameter set");
  }
  if (!tr.pretrain_updated.empty() ||
      tr.transfer_updated != all_names(tm, [](const std::string& s) { return !is_textual_parameter(s); })) {
    problems.push_back("(0,1) touched an unexpected parameter set");
  }
  std::set<std::string> dec_pre, dec_tr;
  for (const auto& s : pre.pretrain_updated) {
    if (s.rfind("decoder.", 0) == 0) dec_pre.insert(s);
  }
  for (const auto& s : tr.transfer_updated) {
    if (s.rfind("decoder.", 0) == 0) dec_tr.insert(s);
  }
  if (dec_pre.empty() || dec_pre != dec_tr) problems.push_back("decoder name-sets differ between procedures");
  if (dec_pre != all_names(pm, [](const std::string& s) { return s.rfind("decoder.", 0) == 0; })) {
    problems.push_back("not every decoder parameter is trained");
  }
  Outcome o;
  o.pass = problems.empty();
  o.detail = o.pass ? "per-epoch order m pretrain then n transfer for (1,3),(2,1),(1,5); (1,0) updates " +
                          std::to_string(pre.pretrain_updated.size()) + " tensors, (0,1) updates " +
                          std::to_string(tr.transfer_updated.size()) + "; " + std::to_string(dec_pre.size()) +
                          " decoder tensors shared by both procedures"
                    : problems.front();
  return o;
}

// 5. Four transfer samples, ADAM at lr 1e-3, combined loss below 0.05 within 500 steps.
Outcome overfit_one_batch() {
  const auto start = Clock::now();
  RunConfig config = RunConfig::make_default();
  const SyntheticGrammar grammar = config.grammar("a");
  const RawCorpus raw = generate_corpus(grammar, {1, 4, 1, 1});
  std::vector<std::vector<std::string>> sentences;
  for (const auto& r : raw.train) sentences.push_back(split_words(r.text));
  const Vocabulary vocab = Vocabulary::build(sentences);
  const Dataset train = tokenize_split("train", raw.train, vocab, grammar);
  ModelConfig mc = config.model();
  mc.vocab_size = vocab.size();
  mc.terminology_names = grammar.terminology_names();
  Model<float> model = Model<float>::create(mc, 1);
  TrainingConfig tc = config.training();
  tc.lr = 1e-3;
  tc.patch_lr = 1e-3;
  Trainer trainer(model, tc, vocab);
  std::vector<const Sample*> batch;
  for (const auto& s : train.samples) batch.push_back(&s);
  double first = 0, last = 0;
  std::size_t reached = 0;
  for (std::size_t step = 1; step <= 500; ++step) {
    last = trainer.transfer_step(batch).total;
    if (step == 1) first = last;
    if (last < 0.05) {
      reached = step;
      break;
    }
  }
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = reached > 0 && secs < 120;
  o.detail = "combined loss " + fixed(first) + " -> " + fixed(last, 5) +
             (reached ? " (< 0.05 at step " + std::to_string(reached) + ")" : " (never below 0.05 in 500 steps)") +
             "; " + fixed(secs, 1) + " s";
  return o;
}

// 6. Default configuration end to end.
Outcome synthetic_learning(const fs::path& work) {
  const auto start = Clock::now();
  RunConfig config = RunConfig::make_default();
  config.set("out_dir", (work / "criterion6").string());
  config.validate();
  const cli::GeneratedData data = cli::generate_data(config);
  const SyntheticGrammar grammar = config.grammar("a");
  ClassificationCounts oracle_counts;
  for (const auto& s : data.a.test.samples) {
    const auto pred = oracle_classify(grammar, s.image);
    const std::vector<double> probs(pred.begin(), pred.end());
    oracle_counts.add(probs, s.labels);
  }
  const cli::RunOutcome run = cli::train_run(config, config.out_dir() / "train", &std::cerr);
  const double secs = seconds_since(start);
  const double f1 = run.test.classification.f1(), b4 = run.test.captions.bleu[3];
  Outcome o;
  o.pass = oracle_counts.f1() == 1.0 && f1 >= 0.90 && b4 >= 0.60 && secs <= 1800;
  o.detail = "oracle F1 " + fixed(oracle_counts.f1()) + "; test F1 " + fixed(f1) + " (>= 0.90), BLEU-4 " + fixed(b4) +
             " (>= 0.60), ROUGE-L " + fixed(run.test.captions.rouge_l) + ", CIDEr-D " +
             fixed(run.test.captions.cider_d) + "; best epoch " + std::to_string(run.report.best_epoch) + "; " +
             fixed(secs / 60, 1) + " min (<= 30)";
  return o;
}

std::vector<std::string> tiny_flags(const fs::path& dir) {
  return {"--out_dir",          dir.string(), "--sizes.textbook",   "16", "--sizes.train",     "24",
          "--sizes.val",        "6",          "--sizes.test",       "6",  "--sizes_b.textbook", "8",
          "--sizes_b.train",    "12",         "--sizes_b.val",      "4",  "--sizes_b.test",    "4",
          "--model.model_dim",  "16",         "--model.num_heads",  "2",  "--model.encoder_layers", "1",
          "--model.decoder_layers", "1",      "--model.ffn_dim",    "32", "--schedule.epochs", "1",
          "--stage_b.epochs",   "1",          "--training.lr",      "0.001", "--stage_b.lr",   "0.001",
          "--decode.max_len",   "30"};
}

int run_cli(std::vector<std::string> args, const fs::path& dir, std::string* out = nullptr) {
  const auto flags = tiny_flags(dir);
  args.insert(args.end(), flags.begin(), flags.end());
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << e.str();
  return code;
}

// 7. Both comparison tables, produced twice under fixed seeds.
Outcome experiment_structure(const fs::path& work) {
  const auto start = Clock::now();
  std::string tables[2][2];
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path dir = work / ("criterion7_" + std::to_string(rep));
    fs::remove_all(dir);
    if (run_cli({"gen-data"}, dir) != 0) return {false, "gen-data failed"};
    if (run_cli({"compare-schedules", "--compare.schedules", "1,1;1,3;1,4;1,5", "--compare.seeds", "1,2,3"}, dir,
                &tables[rep][0]) != 0) {
      return {false, "compare-schedules failed"};
    }
    if (run_cli({"ablate"}, dir, &tables[rep][1]) != 0) return {false, "ablate failed"};
  }
  auto count_rows = [](const std::string& t, const std::string& prefix) {
    std::size_t n = 0;
    std::istringstream in(t);
    for (std::string line; std::getline(in, line);) n += line.rfind(prefix, 0) == 0;
    return n;
  };
  const std::string& sched = tables[0][0];
  const bool ordered = sched.find("(1,1)") < sched.find("(1,3)") && sched.find("(1,3)") < sched.find("(1,4)") &&
                       sched.find("(1,4)") < sched.find("(1,5)");
  const std::size_t sched_rows = count_rows(sched, "(1,");
  const std::size_t ablation_rows = count_rows(tables[0][1], "yes") + count_rows(tables[0][1], "no ");
  const bool same = tables[0][0] == tables[1][0] && tables[0][1] == tables[1][1];
  Outcome o;
  o.pass = same && ordered && sched_rows == 4 && ablation_rows == 8;
  o.detail = "schedule table " + std::to_string(sched_rows) + " rows x 3 seeds, ablation table " +
             std::to_string(ablation_rows) + " rows; reruns " + (same ? "bitwise identical" : "DIFFER") + "; " +
             fixed(seconds_since(start), 1) + " s";
  std::cout << sched << tables[0][1];
  return o;
}

// 8. Resume equivalence, byte-identical dataset files, rejection codes.
Outcome persistence(const fs::path& work) {
  std::vector<std::string> problems;
  const TinyCorpus data;
  const TrainingData td{&data.textbook, &data.train, &data.val};
  const TrainingConfig tc = quick_training(1, 2, 2);

  Model<float> full = Model<float>::create(data.model(), 9);
  Trainer t_full(full, tc, data.vocab);
  t_full.run(td);
  const fs::path dir = work / "criterion8";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::size_t resumed_ok = 0;
  for (std::uint64_t cut : {1u, 5u, 9u, 14u}) {
    Model<float> part = Model<float>::create(data.model(), 9);
    Trainer t_part(part, tc, data.vocab);
    t_part.run(td, cut);
    save_checkpoint(dir / "cut.agck", t_part.checkpoint());
    const CheckpointContents ck = load_checkpoint(dir / "cut.agck");
    Model<float> resumed = model_from_checkpoint(ck);
    Trainer t_res(resumed, tc, data.vocab);
    t_res.resume(ck);
    t_res.run(td);
    if (serialize_checkpoint(t_res.checkpoint()) == serialize_checkpoint(t_full.checkpoint())) {
      ++resumed_ok;
    } else {
      problems.push_back("resume after step " + std::to_string(cut) + " diverged");
    }
  }

  const fs::path cli_dir = work / "criterion8_cli";
  fs::remove_all(cli_dir);
  if (run_cli({"gen-data"}, cli_dir) != 0) return {false, "gen-data failed"};
  std::size_t files = 0;
  for (const char* corpus : {"a", "b"}) {
    for (const char* split : {"textbook", "train", "val", "test"}) {
      const fs::path p = cli_dir / "data" / corpus / (std::string(split) + ".agds");
      const std::string bytes = read_file(p);
      if (serialize_dataset(load_dataset(p)) != bytes) problems.push_back(p.string() + " does not round-trip");
      ++files;
    }
  }

  const fs::path ds_path = cli_dir / "data" / "a" / "train.agds";
  const std::string good = read_file(ds_path);
  struct Damage {
    std::string name;
    std::function<std::string(std::string)> apply;
    IntegrityError::Kind kind;
  };
  const std::vector<Damage> damages{
      {"truncated", [](std::string b) { return b.substr(0, b.size() - 70); }, IntegrityError::Kind::kTruncated},
      {"bad magic", [](std::string b) { b[0] = 'X'; return b; }, IntegrityError::Kind::kBadMagic},
      {"version", [](std::string b) { b[4] = 7; return b; }, IntegrityError::Kind::kVersionMismatch},
      {"flipped byte", [](std::string b) { b[b.size() - 300] ^= 0x04; return b; }, IntegrityError::Kind::kHashMismatch},
  };
  std::size_t rejected = 0;
  for (const auto& d : damages) {
    write_file(ds_path, d.apply(good));
    try {
      load_dataset(ds_path);
      problems.push_back("dataset with " + d.name + " accepted");
    } catch (const IntegrityError& e) {
      if (e.kind() == d.kind) {
        ++rejected;
      } else {
        problems.push_back("dataset with " + d.name + " gave kind " + std::string(to_string(e.kind())));
      }
    }
    if (run_cli({"evaluate", "--ground-truth", "--split", "train"}, cli_dir) != exit_code::kIntegrity) {
      problems.push_back("CLI did not exit 4 on dataset with " + d.name);
    }
  }
  write_file(ds_path, good);

  const std::string ck_bytes = serialize_checkpoint(t_full.checkpoint());
  for (const auto& d : damages) {
    write_file(dir / "bad.agck", d.apply(ck_bytes));
    try {
      load_checkpoint(dir / "bad.agck");
      problems.push_back("checkpoint with " + d.name + " accepted");
    } catch (const IntegrityError& e) {
      if (e.kind() == d.kind) {
        ++rejected;
      } else {
        problems.push_back("checkpoint with " + d.name + " gave kind " + std::string(to_string(e.kind())));
      }
    }
    if (run_cli({"evaluate", "--checkpoint", (dir / "bad.agck").string()}, cli_dir) != exit_code::kIntegrity) {
      problems.push_back("CLI did not exit 4 on checkpoint with " + d.name);
    }
  }
  Outcome o;
  o.pass = problems.empty();
  o.detail = std::to_string(resumed_ok) + "/4 resumed runs bitwise identical; " + std::to_string(files) +
             " dataset files round-trip byte-identically; " + std::to_string(rejected) +
             "/8 damaged files rejected with the expected kind and exit code 4" +
             (problems.empty() ? "" : "; first problem: " + problems.front());
  return o;
}

}  // namespace
}  // namespace altgen

int main(int argc, char** argv) {
  using namespace altgen;
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  std::string work = "acceptance_work";
  app.add_option("--criterion", only, "Run a single criterion (1-8)")->check(CLI::Range(1, 8));
  app.add_option("--work-dir", work, "Scratch directory")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const fs::path work_dir = fs::absolute(work);
  fs::create_directories(work_dir);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradient_correctness},
      {"metric oracle equivalence", metric_equivalence},
      {"loss bookkeeping", loss_bookkeeping},
      {"alternate training contract", schedule_contract},
      {"overfit one batch", overfit_one_batch},
      {"synthetic learning", [&] { return synthetic_learning(work_dir); }},
      {"experiment structure reproduction", [&] { return experiment_structure(work_dir); }},
      {"persistence", [&] { return persistence(work_dir); }},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<std::size_t>(only) != i + 1) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << i + 1 << " (" << criteria[i].first
              << "): " << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
