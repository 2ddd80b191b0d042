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


#include "altgen/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "altgen/attention_export.hpp"
#include "altgen/binary_io.hpp"
#include "altgen/checkpoint.hpp"
#include "altgen/errors.hpp"

namespace altgen::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

const char* const kSplits[] = {"textbook", "train", "val", "test"};

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

fs::path corpus_dir(const RunConfig& config, const std::string& corpus) { return config.data_dir() / corpus; }

void require_data(const RunConfig& config) {
  if (!fs::exists(config.data_dir() / "vocab.txt")) {
    throw IoError("no dataset under '" + config.data_dir().string() + "'; run `altgen gen-data` with the same --out_dir first");
  }
}

CorpusFiles tokenize_corpus(const RawCorpus& raw, const Vocabulary& vocab, const SyntheticGrammar& grammar) {
  CorpusFiles files;
  files.textbook = tokenize_split("textbook", raw.textbook, vocab, grammar);
  files.train = tokenize_split("train", raw.train, vocab, grammar);
  files.val = tokenize_split("val", raw.val, vocab, grammar);
  files.test = tokenize_split("test", raw.test, vocab, grammar);
  return files;
}

ModelConfig model_config_for(const RunConfig& config, const Vocabulary& vocab, const Dataset& data) {
  ModelConfig mc = config.model();
  mc.vocab_size = vocab.size();
  mc.terminology_names = data.terminology_names;
  mc.grid_height = data.grid_height;
  mc.grid_width = data.grid_width;
  mc.grid_channels = data.channels;
  mc.validate();
  return mc;
}

void check_model_matches(const ModelConfig& mc, const Vocabulary& vocab, const Dataset& data) {
  std::vector<std::string> problems;
  if (mc.vocab_size != vocab.size()) {
    problems.push_back("vocabulary size " + std::to_string(mc.vocab_size) + " vs " + std::to_string(vocab.size()));
  }
  if (mc.terminology_names != data.terminology_names) problems.push_back("terminology lists differ");
  if (mc.grid_height != data.grid_height || mc.grid_width != data.grid_width || mc.grid_channels != data.channels) {
    problems.push_back("image grid shapes differ");
  }
  if (problems.empty()) return;
  std::string msg = "checkpoint does not fit dataset '" + data.split + "':";
  for (const auto& p : problems) msg += "\n  - " + p;
  throw ConfigError(msg);
}

ordered_json provenance_for(const RunConfig& config, const std::string& stage) {
  return {{"config_hash", config.hash()}, {"seed", config.seed()}, {"stage", stage}, {"config", config.tree}};
}

TrainingReport train_stage(Model<float>& model, const TrainingConfig& tc, const Vocabulary& vocab,
                           const CorpusFiles& data, const fs::path& ck_dir, EventLog& log, const RunConfig& config,
                           const std::string& stage, std::ostream* progress) {
  fs::create_directories(ck_dir);
  log.write({{"event", "stage"}, {"stage", stage}, {"m", tc.schedule.m}, {"n", tc.schedule.n},
             {"epochs", tc.schedule.epochs}, {"alternate_training", tc.flags.alternate_training},
             {"external_knowledge", tc.flags.external_knowledge}});
  Trainer trainer(model, tc, vocab, &log);
  trainer.set_checkpoint_dir(ck_dir);
  trainer.set_provenance(provenance_for(config, stage));
  trainer.set_progress(progress);
  TrainingData td{&data.textbook, &data.train, &data.val};
  return trainer.run(td);
}

EvaluationOptions eval_options(const RunConfig& config) {
  EvaluationOptions opts;
  opts.decode = config.training().decode;
  return opts;
}

void write_evaluation(const fs::path& stem, const EvaluationResult& r) {
  write_file(fs::path(stem.string() + "_pairs.jsonl"), pairs_to_jsonl(r.pairs));
  ordered_json j = metrics_json(r.captions, &r.classification);
  j["class_loss"] = r.class_loss;
  j["lm_token_loss"] = r.lm_token_loss;
  write_file(fs::path(stem.string() + "_metrics.json"), j.dump(2) + "\n");
}

const Sample& find_sample(const CorpusFiles& files, std::uint64_t id, const std::string& split) {
  for (const char* name : kSplits) {
    if (!split.empty() && split != name) continue;
    for (const auto& s : files.split(name).samples) {
      if (s.id == id) return s;
    }
  }
  throw ConfigError("sample " + std::to_string(id) + " not found" + (split.empty() ? "" : " in split '" + split + "'"));
}

// Metric columns shared by the comparison tables, scaled by 100.
struct Column {
  const char* name;
  double (*get)(const EvaluationResult&);
};

const Column kColumns[] = {
    {"BLEU-1", [](const EvaluationResult& r) { return 100 * r.captions.bleu[0]; }},
    {"BLEU-2", [](const EvaluationResult& r) { return 100 * r.captions.bleu[1]; }},
    {"BLEU-3", [](const EvaluationResult& r) { return 100 * r.captions.bleu[2]; }},
    {"BLEU-4", [](const EvaluationResult& r) { return 100 * r.captions.bleu[3]; }},
    {"ROUGE-L", [](const EvaluationResult& r) { return 100 * r.captions.rouge_l; }},
    {"CIDEr-D", [](const EvaluationResult& r) { return 100 * r.captions.cider_d; }},
    {"F1", [](const EvaluationResult& r) { return 100 * r.classification.f1(); }},
};

constexpr const char* kSyntheticNote =
    "Scores x100 on the synthetic corpus; not comparable to results on clinical data.\n";

}  // namespace

const Dataset& CorpusFiles::split(const std::string& name) const {
  if (name == "textbook") return textbook;
  if (name == "train") return train;
  if (name == "val") return val;
  if (name == "test") return test;
  throw ConfigError("unknown split '" + name + "' (expected textbook, train, val or test)");
}

GeneratedData generate_data(const RunConfig& config) {
  const SyntheticGrammar grammar_a = config.grammar("a");
  const SyntheticGrammar grammar_b = config.grammar("b");
  const RawCorpus raw_a = generate_corpus(grammar_a, config.sizes("a"), 0);
  const RawCorpus raw_b = generate_corpus(grammar_b, config.sizes("b"), 1'000'000'000ULL);

  std::vector<std::vector<std::string>> sentences;
  for (const RawCorpus* raw : {&raw_a, &raw_b}) {
    for (const auto& s : raw->textbook) sentences.push_back(split_words(s.text));
    for (const auto& s : raw->train) sentences.push_back(split_words(s.text));
  }
  GeneratedData out;
  out.vocab = Vocabulary::build(sentences);
  out.a = tokenize_corpus(raw_a, out.vocab, grammar_a);
  out.b = tokenize_corpus(raw_b, out.vocab, grammar_b);

  const fs::path root = config.data_dir();
  fs::create_directories(root);
  out.vocab.save(root / "vocab.txt");
  out.file_hashes.emplace_back("vocab.txt", sha256_hex(read_file(root / "vocab.txt")));
  for (const auto& [name, files, grammar] :
       {std::tuple<std::string, const CorpusFiles*, const SyntheticGrammar*>{"a", &out.a, &grammar_a},
        {"b", &out.b, &grammar_b}}) {
    const fs::path dir = root / name;
    fs::create_directories(dir);
    grammar->save(dir / "grammar.json");
    for (const char* split : kSplits) {
      const Dataset& ds = files->split(split);
      const fs::path path = dir / (std::string(split) + ".agds");
      save_dataset(path, ds);
      write_file(dir / (std::string(split) + ".jsonl"), dataset_sidecar(ds, out.vocab));
      out.file_hashes.emplace_back(name + "/" + split + ".agds", sha256_hex(serialize_dataset(ds)));
    }
  }
  return out;
}

Vocabulary load_vocabulary(const RunConfig& config) {
  require_data(config);
  return Vocabulary::load(config.data_dir() / "vocab.txt");
}

CorpusFiles load_corpus(const RunConfig& config, const std::string& corpus) {
  require_data(config);
  const fs::path dir = corpus_dir(config, corpus);
  CorpusFiles files;
  files.textbook = load_dataset(dir / "textbook.agds");
  files.train = load_dataset(dir / "train.agds");
  files.val = load_dataset(dir / "val.agds");
  files.test = load_dataset(dir / "test.agds");
  return files;
}

RunOutcome train_run(const RunConfig& config, const fs::path& dir, std::ostream* progress) {
  config.validate();
  const Vocabulary vocab = load_vocabulary(config);
  const std::string target = config.target_corpus();
  const CorpusFiles data = load_corpus(config, target);
  for (const char* split : kSplits) data.split(split).validate(vocab.size());
  if (data.train.vocab_fingerprint != vocab.fingerprint()) {
    throw IntegrityError(IntegrityError::Kind::kCorrupt, "dataset was tokenized with a different vocabulary");
  }

  fs::create_directories(dir);
  write_file(dir / "config.json", config.dump());
  EventLog log(dir / "events.jsonl");
  log.keep_in_memory(false);

  Model<float> model = Model<float>::create(model_config_for(config, vocab, data.train), config.seed());
  RunOutcome out;
  out.dir = dir;
  const TrainingConfig tc = config.training();
  if (tc.flags.transfer_learning) {
    const CorpusFiles source = load_corpus(config, "a");
    check_transfer_compatible(source.train, data.train);
    if (progress) *progress << "stage A: corpus a\n";
    out.stage_a = train_stage(model, tc, vocab, source, dir / "stage_a", log, config, "a", progress);
    restore_checkpoint(load_checkpoint(dir / "stage_a" / "best.agck"), model, nullptr);
    if (progress) *progress << "stage B: corpus " << target << "\n";
    out.report = train_stage(model, config.stage_b_training(), vocab, data, dir, log, config, "b", progress);
  } else {
    out.report = train_stage(model, tc, vocab, data, dir, log, config, target, progress);
  }

  const Model<float> best = model_from_checkpoint(load_checkpoint(dir / "best.agck"));
  out.test = evaluate_model(best, data.test, vocab, eval_options(config));
  write_evaluation(dir / "test", out.test);
  ordered_json rec = {{"event", "test"}, {"best_epoch", out.report.best_epoch}};
  rec.update(metrics_json(out.test.captions, &out.test.classification));
  log.write(rec);
  return out;
}

std::string schedule_table(const std::vector<std::pair<std::size_t, std::size_t>>& schedules,
                           const std::vector<std::vector<EvaluationResult>>& results) {
  if (schedules.size() != results.size()) throw ContractError("schedule_table: one result row per schedule");
  std::string out = "Alternate training schedules (mean +- sd over seeds)\n";
  out += pad("(m,n)", 8);
  for (const auto& c : kColumns) out += pad(c.name, 16);
  out += "\n";
  for (std::size_t i = 0; i < schedules.size(); ++i) {
    out += pad("(" + std::to_string(schedules[i].first) + "," + std::to_string(schedules[i].second) + ")", 8);
    const auto& row = results[i];
    if (row.empty()) throw ContractError("schedule_table: row without results");
    for (const auto& c : kColumns) {
      double mean = 0;
      for (const auto& r : row) mean += c.get(r);
      mean /= static_cast<double>(row.size());
      double var = 0;
      for (const auto& r : row) var += (c.get(r) - mean) * (c.get(r) - mean);
      const double sd = row.size() > 1 ? std::sqrt(var / static_cast<double>(row.size() - 1)) : 0.0;
      out += pad(fmt("%.2f", mean) + " +- " + fmt("%.2f", sd), 16);
    }
    out += "\n";
  }
  return out + kSyntheticNote;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::string out = "Ablation of alternate training (ATS), transfer learning (TLS) and external knowledge (EK)\n";
  out += pad("ATS", 5) + pad("TLS", 5) + pad("EK", 5);
  for (const auto& c : kColumns) out += pad(c.name, 9);
  out += "\n";
  for (const auto& row : rows) {
    out += pad(row.flags.alternate_training ? "yes" : "no", 5) + pad(row.flags.transfer_learning ? "yes" : "no", 5) +
           pad(row.flags.external_knowledge ? "yes" : "no", 5);
    for (const auto& c : kColumns) out += pad(fmt("%.2f", c.get(row.result)), 9);
    out += "\n";
  }
  return out + kSyntheticNote;
}

namespace {

struct Command {
  CLI::App* app = nullptr;
  std::string config_file;
  std::string schedule;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_config_flags(Command& cmd) {
  cmd.app->add_option("--config", cmd.config_file, "JSON configuration file overlaid onto the defaults")
      ->check(CLI::ExistingFile);
  cmd.app->add_option("--schedule", cmd.schedule, "Shorthand for schedule.m and schedule.n, e.g. 1,3");
  for (const std::string& key : leaf_keys(RunConfig::defaults())) {
    const ordered_json* leaf = &RunConfig::defaults();
    std::stringstream parts(key);
    std::string part;
    while (std::getline(parts, part, '.')) leaf = &leaf->at(part);
    std::string names = "--" + key;
    if (key == "out_dir") names += ",--out-dir";
    const std::string shown = leaf->is_string() ? leaf->get<std::string>() : leaf->dump();
    cmd.options[key] = cmd.app->add_option(names, cmd.values[key], "default: " + shown);
  }
}

RunConfig resolve(const Command& cmd) {
  RunConfig config = RunConfig::make_default();
  if (!cmd.config_file.empty()) config.merge_file(cmd.config_file);
  for (const auto& [key, opt] : cmd.options) {
    if (opt->count() > 0) config.set(key, cmd.values.at(key));
  }
  if (!cmd.schedule.empty()) {
    const auto [m, n] = parse_schedule(cmd.schedule);
    config.set("schedule.m", std::to_string(m));
    config.set("schedule.n", std::to_string(n));
  }
  config.validate();
  return config;
}

void print_summary_table(std::ostream& out, const RunOutcome& r) {
  out << "best epoch " << r.report.best_epoch << " (validation CIDEr-D " << fmt("%.4f", r.report.best_score)
      << ")\n";
  out << "test split\n" << metrics_table(r.test.captions, &r.test.classification);
}

int cmd_gen_data(const RunConfig& config, std::ostream& out) {
  const GeneratedData data = generate_data(config);
  out << "vocabulary: " << data.vocab.size() << " tokens\n";
  for (const auto& [name, files] : {std::pair<std::string, const CorpusFiles*>{"a", &data.a}, {"b", &data.b}}) {
    for (const char* split : kSplits) {
      const Dataset& ds = files->split(split);
      const DatasetSummary s = summarize(ds);
      double prevalence = 0;
      for (double p : s.label_prevalence) prevalence += p;
      if (!s.label_prevalence.empty()) prevalence /= static_cast<double>(s.label_prevalence.size());
      out << name << "/" << pad(split, 9) << pad(std::to_string(s.samples) + " samples", 14)
          << pad(std::to_string(s.tokens) + " tokens", 15) << "UNK " << fmt("%.4f", s.unk_rate())
          << "  mean label prevalence " << fmt("%.4f", prevalence) << "\n";
    }
  }
  for (const auto& [path, hash] : data.file_hashes) out << "sha256 " << hash << "  " << path << "\n";
  return exit_code::kOk;
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const RunOutcome r = train_run(config, config.out_dir() / "train", &err);
  print_summary_table(out, r);
  out << "checkpoint " << (r.dir / "best.agck").string() << "\n";
  return exit_code::kOk;
}

struct EvalArgs {
  std::string checkpoint, split = "test", corpus, pairs;
  bool ground_truth = false;
};

int cmd_evaluate(const RunConfig& config, const EvalArgs& args, std::ostream& out) {
  if (!args.pairs.empty()) {
    const std::vector<EvalPair> pairs = pairs_from_jsonl(read_file(args.pairs));
    if (pairs.empty()) throw ConfigError("'" + args.pairs + "' holds no candidate/reference pairs");
    out << metrics_table(caption_metrics(pairs), nullptr);
    return exit_code::kOk;
  }
  const Vocabulary vocab = load_vocabulary(config);
  const std::string corpus = args.corpus.empty() ? config.target_corpus() : args.corpus;
  if (corpus != "a" && corpus != "b") throw ConfigError("--corpus must be a or b");
  const Dataset data = load_dataset(corpus_dir(config, corpus) / (args.split + ".agds"));
  data.validate(vocab.size());
  EvaluationResult r;
  if (args.ground_truth) {
    r = evaluate_ground_truth(data, vocab);
  } else {
    const fs::path ck = args.checkpoint.empty() ? config.out_dir() / "train" / "best.agck" : fs::path(args.checkpoint);
    const Model<float> model = model_from_checkpoint(load_checkpoint(ck));
    check_model_matches(model.config(), vocab, data);
    r = evaluate_model(model, data, vocab, eval_options(config));
  }
  const fs::path dir = config.out_dir() / "eval";
  fs::create_directories(dir);
  const fs::path stem = dir / (corpus + "_" + args.split + (args.ground_truth ? "_ground_truth" : ""));
  write_evaluation(stem, r);
  out << metrics_table(r.captions, &r.classification);
  out << "pairs " << stem.string() << "_pairs.jsonl\n";
  return exit_code::kOk;
}

struct SampleArgs {
  std::string checkpoint, split, corpus, out_path;
  std::uint64_t sample = 0;
  std::size_t top_k = 3;
};

int cmd_generate(const RunConfig& config, const SampleArgs& args, std::ostream& out) {
  const Vocabulary vocab = load_vocabulary(config);
  const CorpusFiles files = load_corpus(config, args.corpus.empty() ? config.target_corpus() : args.corpus);
  const Sample& sample = find_sample(files, args.sample, args.split);
  const fs::path ck = args.checkpoint.empty() ? config.out_dir() / "train" / "best.agck" : fs::path(args.checkpoint);
  const Model<float> model = model_from_checkpoint(load_checkpoint(ck));
  check_model_matches(model.config(), vocab, files.train);
  const std::vector<double> probs = model.classify(sample);
  out << "sample " << sample.id << "\n";
  out << "findings:";
  bool any = false;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] >= 0.5) {
      out << " " << model.config().terminology_names[i] << " (" << fmt("%.3f", probs[i]) << ")";
      any = true;
    }
  }
  out << (any ? "\n" : " none\n");
  out << "generated: " << vocab.decode(model.generate(sample, config.training().decode)) << "\n";
  out << "reference: " << vocab.decode(sample.tokens) << "\n";
  return exit_code::kOk;
}

int cmd_export_attention(const RunConfig& config, const SampleArgs& args, std::ostream& out) {
  const Vocabulary vocab = load_vocabulary(config);
  const CorpusFiles files = load_corpus(config, args.corpus.empty() ? config.target_corpus() : args.corpus);
  const Sample& sample = find_sample(files, args.sample, args.split);
  const fs::path ck = args.checkpoint.empty() ? config.out_dir() / "train" / "best.agck" : fs::path(args.checkpoint);
  const Model<float> model = model_from_checkpoint(load_checkpoint(ck));
  check_model_matches(model.config(), vocab, files.train);

  const UnifiedFeatures<float> unified = model.unified(sample, &vocab);
  AttentionRecorder recorder;
  ForwardContext<float> ctx;
  ctx.recorder = &recorder;
  {
    NoGradGuard no_grad;
    model.encoder().encode(unified, ctx);
  }
  const AttentionExport att = collect_attention(unified, recorder);
  const fs::path path = args.out_path.empty()
                            ? config.out_dir() / "attention" / ("sample_" + std::to_string(sample.id) + ".agat")
                            : fs::path(args.out_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, serialize_attention(att));
  write_file(fs::path(path.string() + ".txt"), attention_text_dump(att));
  const std::string summary = attention_topk_summary(att, args.top_k);
  write_file(fs::path(path.string() + ".topk.txt"), summary);
  out << summary << "attention " << path.string() << "\n";
  return exit_code::kOk;
}

int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto schedules = config.compare_schedules();
  const auto seeds = config.compare_seeds();
  if (schedules.size() < 2) throw ConfigError("compare.schedules needs at least two schedules");
  std::vector<std::vector<EvaluationResult>> results;
  for (const auto& [m, n] : schedules) {
    results.emplace_back();
    for (std::uint64_t seed : seeds) {
      RunConfig cell = config;
      cell.set("schedule.m", std::to_string(m));
      cell.set("schedule.n", std::to_string(n));
      cell.set("seed", std::to_string(seed));
      const std::string name = "m" + std::to_string(m) + "_n" + std::to_string(n) + "_seed" + std::to_string(seed);
      err << "run " << name << "\n";
      results.back().push_back(train_run(cell, config.out_dir() / "compare" / name, &err).test);
    }
  }
  const std::string table = schedule_table(schedules, results);
  write_file(config.out_dir() / "compare" / "table.txt", table);
  out << table;
  return exit_code::kOk;
}

int cmd_ablate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<AblationRow> rows;
  for (int bits = 7; bits >= 0; --bits) {
    AblationFlags flags{(bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0};
    RunConfig cell = config;
    cell.set("training.target", "b");
    cell.set("flags.alternate_training", flags.alternate_training ? "true" : "false");
    cell.set("flags.transfer_learning", flags.transfer_learning ? "true" : "false");
    cell.set("flags.external_knowledge", flags.external_knowledge ? "true" : "false");
    if (!flags.external_knowledge) cell.set("schedule.m", "0");
    const std::string name = std::string("ats") + (flags.alternate_training ? "1" : "0") + "_tls" +
                             (flags.transfer_learning ? "1" : "0") + "_ek" + (flags.external_knowledge ? "1" : "0");
    err << "run " << name << "\n";
    rows.push_back({flags, train_run(cell, config.out_dir() / "ablate" / name, &err).test});
  }
  const std::string table = ablation_table(rows);
  write_file(config.out_dir() / "ablate" / "table.txt", table);
  out << table;
  return exit_code::kOk;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Terminology-guided report generation: data, training, evaluation and analysis", "altgen"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  std::vector<std::unique_ptr<Command>> commands;
  auto make = [&](const std::string& name, const std::string& description) -> Command& {
    commands.push_back(std::make_unique<Command>());
    commands.back()->app = app.add_subcommand(name, description);
    add_config_flags(*commands.back());
    return *commands.back();
  };

  Command& gen = make("gen-data", "Generate both synthetic corpora and the shared vocabulary");
  Command& train = make("train", "Train a model; writes events, checkpoints and test metrics under <out_dir>/train");
  Command& evaluate = make("evaluate", "Score a checkpoint, a ground-truth split or a dumped pairs file");
  EvalArgs eval_args;
  evaluate.app->add_option("--checkpoint", eval_args.checkpoint, "default: <out_dir>/train/best.agck");
  evaluate.app->add_option("--split", eval_args.split, "textbook, train, val or test")->capture_default_str();
  evaluate.app->add_option("--corpus", eval_args.corpus, "a or b; default: training.target");
  evaluate.app->add_option("--pairs", eval_args.pairs, "Re-score a candidate/reference JSONL dump")
      ->check(CLI::ExistingFile);
  evaluate.app->add_flag("--ground-truth", eval_args.ground_truth, "Score the references against themselves");

  SampleArgs gen_args, att_args;
  Command& generate = make("generate", "Classify one sample and generate its report");
  Command& attention = make("export-attention", "Write the encoder attention maps of one sample");
  for (auto [cmd, a] : {std::pair<Command*, SampleArgs*>{&generate, &gen_args}, {&attention, &att_args}}) {
    cmd->app->add_option("--sample", a->sample, "Sample id")->required();
    cmd->app->add_option("--checkpoint", a->checkpoint, "default: <out_dir>/train/best.agck");
    cmd->app->add_option("--split", a->split, "Restrict the sample search to one split");
    cmd->app->add_option("--corpus", a->corpus, "a or b; default: training.target");
  }
  attention.app->add_option("--out", att_args.out_path, "default: <out_dir>/attention/sample_<id>.agat");
  attention.app->add_option("--top-k", att_args.top_k, "Positions listed per terminology")->capture_default_str();
  Command& compare = make("compare-schedules", "Train every compare.schedules x compare.seeds cell and tabulate");
  Command& ablate = make("ablate", "Train the eight ATS/TLS/EK combinations on corpus b and tabulate");
  Command& print = make("print-config", "Print the fully resolved configuration");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    for (const auto* sub : app.get_subcommands()) err << "run `altgen " << sub->get_name() << " --help` for usage\n";
    return exit_code::kConfig;
  }

  for (const auto& cmd : commands) {
    if (!cmd->app->parsed()) continue;
    const RunConfig config = resolve(*cmd);
    if (cmd.get() == &gen) return cmd_gen_data(config, out);
    if (cmd.get() == &train) return cmd_train(config, out, err);
    if (cmd.get() == &evaluate) return cmd_evaluate(config, eval_args, out);
    if (cmd.get() == &generate) return cmd_generate(config, gen_args, out);
    if (cmd.get() == &attention) return cmd_export_attention(config, att_args, out);
    if (cmd.get() == &compare) return cmd_compare(config, out, err);
    if (cmd.get() == &ablate) return cmd_ablate(config, out, err);
    if (cmd.get() == &print) {
      out << config.dump();
      return exit_code::kOk;
    }
  }
  return exit_code::kConfig;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return exit_code::kConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return exit_code::kIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return exit_code::kIo;
  } catch (const IntegrityError& e) {
    err << "integrity error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code::kIntegrity;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return exit_code::kNumeric;
  } catch (const ContractError& e) {
    err << "internal error: " << e.what() << "\n";
    return exit_code::kContract;
  }
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

}  // namespace altgen::cli
