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
#include <functional>
#include <map>
#include <random>

#include "altgen/decoder.hpp"
#include "altgen/errors.hpp"
#include "support.hpp"

namespace altgen {
namespace {

struct DecoderFixture {
  std::mt19937_64 rng{31};
  ParameterStore<double> store;
  LanguageDecoder<double> dec;
  Tensor<double> feats;

  DecoderFixture() {
    DecoderConfig c;
    c.vocab_size = 9;
    c.heads = {4, 2};
    c.num_blocks = 1;
    c.ffn_dim = 8;
    c.max_len = 10;
    c.embed_stddev = 0.7;
    dec = LanguageDecoder<double>::create(store, "decoder", c, rng);
    feats = testing::random_tensor({3, 4}, rng, 1.0, false);
  }
};

TEST(Decoder, LogitsAreCausal) {
  DecoderFixture f;
  const std::vector<TokenId> a{1, 4, 5, 6, 7}, b{1, 4, 5, 8, 3};
  const auto la = f.dec.forward(a, f.feats), lb = f.dec.forward(b, f.feats);
  ASSERT_EQ(la.shape(), (Shape{5, 9}));
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 9; ++c) EXPECT_DOUBLE_EQ(la.at(r, c), lb.at(r, c));
  EXPECT_NE(la.at(4, 0), lb.at(4, 0));
}

TEST(Decoder, SharedEmbeddingIsOutputProjection) {
  DecoderFixture f;
  EXPECT_TRUE(f.store.contains("decoder.word_embed"));
  EXPECT_EQ(f.store.names_with_prefix("decoder.out").size(), 0u);
}

TEST(Decoder, RejectsBadInput) {
  DecoderFixture f;
  EXPECT_THROW(f.dec.forward(std::vector<TokenId>{}, f.feats), ContractError);
  EXPECT_THROW(f.dec.forward(std::vector<TokenId>{1, 9}, f.feats), ContractError);
  EXPECT_THROW(f.dec.forward(std::vector<TokenId>(11, 4), f.feats), ContractError);
}

TEST(Decoder, SequenceLossMatchesLogSoftmaxOracle) {
  DecoderFixture f;
  const std::vector<TokenId> seq{1, 4, 5, 6, 2, 0};
  const auto loss = sequence_loss(f.dec, seq, f.feats);
  const auto logits = f.dec.forward(std::span<const TokenId>(seq).first(5), f.feats);
  double expect = 0;
  for (std::size_t r = 0; r < 5; ++r) {
    if (seq[r + 1] == kPad) continue;
    double z = 0;
    for (std::size_t c = 0; c < 9; ++c) z += std::exp(logits.at(r, c));
    expect -= logits.at(r, seq[r + 1]) - std::log(z);
  }
  EXPECT_NEAR(loss.total.item(), expect, 1e-12);
  EXPECT_EQ(loss.tokens, 4u);
  EXPECT_NEAR(loss.mean_per_token(), expect / 4, 1e-12);
}

TEST(Decoder, GradientThroughDecoderAndFeatures) {
  DecoderFixture f;
  const std::vector<TokenId> seq{1, 4, 5, 6, 2};
  Tensor<double> feats(f.feats.shape(), std::vector<double>(f.feats.values().begin(), f.feats.values().end()), true);
  std::vector<Tensor<double>> inputs{feats};
  for (const auto& p : f.store.all()) inputs.push_back(p.tensor);
  const auto r = testing::grad_check(inputs, [&] { return sequence_loss(f.dec, seq, feats).total; });
  EXPECT_LE(r.max_rel_err, 1e-6);
}

TEST(Decoder, PerplexityMatchesMeanTokenLoss) {
  DecoderFixture f;
  const std::vector<std::vector<TokenId>> corpus{{1, 4, 5, 2}, {1, 6, 2}};
  double total = 0;
  std::size_t tokens = 0;
  for (const auto& s : corpus) {
    const auto l = sequence_loss(f.dec, s, f.feats);
    total += l.total.item();
    tokens += l.tokens;
  }
  const double ppl = perplexity<double>(f.dec, corpus, [&](std::size_t) { return f.feats; });
  EXPECT_NEAR(ppl, std::exp(total / tokens), 1e-9);
  EXPECT_THROW(perplexity<double>(f.dec, std::vector<std::vector<TokenId>>{}, [&](std::size_t) { return f.feats; }),
               ContractError);
}

// Scripted next-token distributions keyed by the prefix.
NextTokenLogits table_fn(std::map<std::vector<TokenId>, std::vector<double>> table, std::size_t vocab) {
  return [table = std::move(table), vocab](std::span<const TokenId> prefix) {
    const std::vector<TokenId> key(prefix.begin(), prefix.end());
    auto it = table.find(key);
    if (it != table.end()) return it->second;
    std::vector<double> uniform(vocab, 0.0);
    uniform[kEos] = 5.0;
    return uniform;
  };
}

TEST(Generate, GreedyStopsAtEosAndBreaksTiesLow) {
  const auto fn = table_fn({{{1}, {0, 0, 0, 0, 3, 3}}, {{1, 4}, {0, 0, 9, 0, 0, 0}}}, 6);
  DecodeOptions o;
  o.max_len = 10;
  EXPECT_EQ(generate(fn, o), (std::vector<TokenId>{1, 4, 2}));
  o.max_len = 2;
  EXPECT_EQ(generate(fn, o), (std::vector<TokenId>{1, 4}));
}

std::vector<double> log_softmax(const std::vector<double>& z) {
  double mx = z[0];
  for (double v : z) mx = std::max(mx, v);
  double s = 0;
  for (double v : z) s += std::exp(v - mx);
  std::vector<double> out;
  for (double v : z) out.push_back(v - mx - std::log(s));
  return out;
}

// Exhaustive search over every sequence up to max_len.
std::pair<double, std::vector<TokenId>> best_sequence(const NextTokenLogits& fn, std::vector<TokenId> prefix,
                                                       double score, std::size_t max_len, std::size_t vocab) {
  if (prefix.back() == kEos || prefix.size() >= max_len) return {score, prefix};
  const auto lp = log_softmax(fn(prefix));
  std::pair<double, std::vector<TokenId>> best{-INFINITY, {}};
  for (std::size_t t = 0; t < vocab; ++t) {
    auto next = prefix;
    next.push_back(static_cast<TokenId>(t));
    auto cand = best_sequence(fn, next, score + lp[t], max_len, vocab);
    if (cand.first > best.first) best = cand;
  }
  return best;
}

TEST(Generate, WideBeamFindsExhaustiveOptimum) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 2.0);
  const std::size_t vocab = 4, max_len = 5;
  for (int trial = 0; trial < 10; ++trial) {
    std::map<std::vector<TokenId>, std::vector<double>> table;
    std::function<void(std::vector<TokenId>)> fill = [&](std::vector<TokenId> p) {
      if (p.size() >= max_len || p.back() == kEos) return;
      std::vector<double> z(vocab);
      for (auto& v : z) v = nd(rng);
      table[p] = z;
      for (std::size_t t = 0; t < vocab; ++t) {
        auto n = p;
        n.push_back(static_cast<TokenId>(t));
        fill(n);
      }
    };
    fill({kBos});
    const auto fn = table_fn(table, vocab);
    DecodeOptions o;
    o.mode = DecodeMode::kBeam;
    o.beam_width = 64;
    o.max_len = max_len;
    const auto oracle = best_sequence(fn, {kBos}, 0.0, max_len, vocab);
    EXPECT_EQ(generate(fn, o), oracle.second) << "trial " << trial;

    DecodeOptions g;
    g.max_len = max_len;
    o.beam_width = 1;
    EXPECT_EQ(generate(fn, o), generate(fn, g)) << "trial " << trial;
  }
}

TEST(Generate, DecoderGenerationIsCappedAtMaxLen) {
  DecoderFixture f;
  DecodeOptions o;
  o.max_len = 100;
  const auto out = generate(f.dec, f.feats, o);
  EXPECT_LE(out.size(), 10u);
  EXPECT_EQ(out.front(), kBos);
}

}  // namespace
}  // namespace altgen
