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

#include <filesystem>
#include <set>

#include "altgen/binary_io.hpp"
#include "altgen/dataset.hpp"
#include "altgen/errors.hpp"
#include "altgen/grammar.hpp"
#include "altgen/vocabulary.hpp"

namespace altgen {
namespace {

namespace fs = std::filesystem;

CorpusSizes small_sizes() { return {40, 120, 30, 30}; }

Vocabulary vocab_for(const RawCorpus& raw) {
  std::vector<std::vector<std::string>> sentences;
  for (const auto& s : raw.train) sentences.push_back(split_words(s.text));
  for (const auto& s : raw.textbook) sentences.push_back(split_words(s.text));
  return Vocabulary::build(sentences);
}

TEST(Vocabulary, ReservedTokensAndEmptyText) {
  const Vocabulary v;
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.encode(""), (std::vector<TokenId>{kBos, kEos}));
}

TEST(Vocabulary, RoundTripAndUnknown) {
  const std::vector<std::vector<std::string>> s{split_words("The lungs are clear."), split_words("a nodule, small")};
  const Vocabulary v = Vocabulary::build(s);
  EXPECT_EQ(v.decode(v.encode("The lungs are clear.")), "the lungs are clear .");
  EXPECT_EQ(normalize_text("A nodule,small"), "a nodule , small");
  const auto ids = v.encode("the zebra");
  EXPECT_EQ(ids[2], kUnk);
  EXPECT_EQ(v.decode(ids), "the " + v.token(kUnk));
}

TEST(Vocabulary, FileRoundTripPreservesFingerprint) {
  const std::vector<std::vector<std::string>> s{split_words("b a c")};
  const Vocabulary v = Vocabulary::build(s);
  const fs::path p = fs::temp_directory_path() / "altgen_vocab_test.txt";
  v.save(p);
  const Vocabulary back = Vocabulary::load(p);
  EXPECT_EQ(back.tokens(), v.tokens());
  EXPECT_EQ(back.fingerprint(), v.fingerprint());
  EXPECT_EQ(v.token(4), "a");
  fs::remove(p);
}

TEST(Grammar, DefaultIsValidAndSerializes) {
  const SyntheticGrammar g = default_grammar(16, 7, 0);
  EXPECT_NO_THROW(g.validate());
  EXPECT_EQ(g.num_terms(), 16u);
  const SyntheticGrammar back = SyntheticGrammar::from_json(g.to_json());
  EXPECT_EQ(back.to_json(), g.to_json());
  EXPECT_EQ(back.hash(), g.hash());
  for (const auto& t : g.terms) EXPECT_GE(t.patterns.size(), 1u);
  EXPECT_GE(g.report_templates.size(), 2u);
}

TEST(Grammar, SiblingsSharePatternsButNotTemplateMix) {
  const SyntheticGrammar a = default_grammar(8, 7, 0), b = default_grammar(8, 7, 1);
  EXPECT_EQ(a.terminology_names(), b.terminology_names());
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    EXPECT_EQ(a.terms[i].patterns[0].signature, b.terms[i].patterns[0].signature);
  }
  EXPECT_NE(a.report_templates[0].weight, b.report_templates[0].weight);
}

TEST(Grammar, InvalidGrammarsRejected) {
  SyntheticGrammar g = default_grammar(4, 1, 0);
  g.terms[1].patterns.clear();
  EXPECT_THROW(g.validate(), ConfigError);
  g = default_grammar(4, 1, 0);
  g.report_templates.resize(1);
  EXPECT_THROW(g.validate(), ConfigError);
  g = default_grammar(4, 1, 0);
  g.terms[0].patterns[0].row = 99;
  EXPECT_THROW(g.validate(), ConfigError);
  EXPECT_THROW(default_grammar(0, 1, 0), ConfigError);
}

TEST(Corpus, TooManySamplesForCombinatoricsIsConfigError) {
  const SyntheticGrammar g = default_grammar(1, 1, 0);
  EXPECT_THROW(generate_corpus(g, {1, 1000, 10, 10}), ConfigError);
}

class CorpusTest : public ::testing::Test {
 protected:
  SyntheticGrammar grammar = default_grammar(16, 7, 0);
  RawCorpus raw = generate_corpus(grammar, small_sizes());
};

TEST_F(CorpusTest, DeterministicInSeed) {
  const RawCorpus again = generate_corpus(grammar, small_sizes());
  ASSERT_EQ(again.train.size(), raw.train.size());
  for (std::size_t i = 0; i < raw.train.size(); ++i) {
    EXPECT_EQ(again.train[i].text, raw.train[i].text);
    EXPECT_EQ(again.train[i].image.values, raw.train[i].image.values);
  }
}

TEST_F(CorpusTest, SplitsDisjointById) {
  std::set<std::uint64_t> ids;
  std::size_t total = 0;
  for (const auto* split : {&raw.textbook, &raw.train, &raw.val, &raw.test}) {
    for (const auto& s : *split) ids.insert(s.id);
    total += split->size();
  }
  EXPECT_EQ(ids.size(), total);
}

TEST_F(CorpusTest, LabelsMatchMentionedTerms) {
  std::size_t normals = 0;
  for (const auto* split : {&raw.textbook, &raw.train, &raw.val, &raw.test}) {
    for (const auto& s : *split) {
      EXPECT_EQ(mentioned_terms(grammar, s.text), s.labels) << s.text;
      std::size_t positives = 0;
      for (auto l : s.labels) positives += l;
      if (positives == 0) {
        ++normals;
        EXPECT_NE(s.text.find(grammar.clear_sentence), std::string::npos);
      }
    }
  }
  EXPECT_GT(normals, 0u);
}

TEST_F(CorpusTest, OracleClassifierSeparatesPerfectly) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (const auto* split : {&raw.train, &raw.val, &raw.test}) {
    for (const auto& s : *split) {
      const auto pred = oracle_classify(grammar, s.image);
      for (std::size_t i = 0; i < pred.size(); ++i) {
        tp += pred[i] && s.labels[i];
        fp += pred[i] && !s.labels[i];
        fn += !pred[i] && s.labels[i];
      }
    }
  }
  EXPECT_GT(tp, 0u);
  EXPECT_EQ(fp, 0u);
  EXPECT_EQ(fn, 0u);
}

TEST_F(CorpusTest, HeldOutUnknownRateIsSmall) {
  const Vocabulary v = vocab_for(raw);
  for (const auto* split : {&raw.val, &raw.test}) {
    const Dataset ds = tokenize_split("x", *split, v, grammar);
    EXPECT_LE(summarize(ds).unk_rate(), 0.05);
  }
}

class DatasetFileTest : public CorpusTest {
 protected:
  Vocabulary vocab = vocab_for(raw);
  Dataset ds = tokenize_split("train", raw.train, vocab, grammar);
};

TEST_F(DatasetFileTest, SaveLoadSaveIsByteIdentical) {
  const std::string bytes = serialize_dataset(ds);
  const Dataset back = parse_dataset(bytes);
  EXPECT_EQ(serialize_dataset(back), bytes);
  EXPECT_EQ(back.samples.size(), ds.samples.size());
  EXPECT_EQ(back.vocab_fingerprint, vocab.fingerprint());
  const fs::path p = fs::temp_directory_path() / "altgen_ds_test.agds";
  save_dataset(p, ds);
  EXPECT_EQ(read_file(p), bytes);
  EXPECT_EQ(serialize_dataset(load_dataset(p)), bytes);
  fs::remove(p);
}

TEST_F(DatasetFileTest, LoadedLabelsEqualRegeneratedLabels) {
  const Dataset back = parse_dataset(serialize_dataset(ds));
  const RawCorpus regen = generate_corpus(default_grammar(16, 7, 0), small_sizes());
  for (std::size_t i = 0; i < back.samples.size(); ++i) {
    EXPECT_EQ(back.samples[i].labels, regen.train[i].labels);
    EXPECT_EQ(back.samples[i].id, regen.train[i].id);
  }
}

IntegrityError::Kind kind_of(const std::string& bytes) {
  try {
    parse_dataset(bytes);
  } catch (const IntegrityError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no IntegrityError";
  return IntegrityError::Kind::kCorrupt;
}

TEST_F(DatasetFileTest, CorruptionKindsAreDistinct) {
  const std::string bytes = serialize_dataset(ds);
  std::string bad = bytes;
  bad[0] = 'Z';
  EXPECT_EQ(kind_of(bad), IntegrityError::Kind::kBadMagic);
  bad = bytes;
  bad[4] = 9;
  EXPECT_EQ(kind_of(bad), IntegrityError::Kind::kVersionMismatch);
  EXPECT_EQ(kind_of(bytes.substr(0, bytes.size() / 2)), IntegrityError::Kind::kTruncated);
  bad = bytes;
  bad[bytes.size() - 200] ^= 0x01;
  EXPECT_EQ(kind_of(bad), IntegrityError::Kind::kHashMismatch);
  EXPECT_THROW(load_dataset(fs::temp_directory_path() / "altgen_missing.agds"), IoError);
}

TEST_F(DatasetFileTest, ValidateCatchesOutOfRangeTokens) {
  Dataset bad = ds;
  bad.samples[0].tokens[1] = static_cast<TokenId>(vocab.size());
  EXPECT_THROW(bad.validate(vocab.size()), IntegrityError);
  bad = ds;
  bad.samples[0].labels.pop_back();
  EXPECT_THROW(bad.validate(vocab.size()), IntegrityError);
}

TEST_F(DatasetFileTest, SidecarHasOneLinePerSample) {
  const std::string side = dataset_sidecar(ds, vocab);
  EXPECT_EQ(static_cast<std::size_t>(std::count(side.begin(), side.end(), '\n')), ds.samples.size());
}

TEST_F(DatasetFileTest, TokensRoundTripTrainingText) {
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    EXPECT_EQ(vocab.decode(ds.samples[i].tokens), normalize_text(raw.train[i].text));
  }
}

}  // namespace
}  // namespace altgen
