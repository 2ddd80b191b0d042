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


#include "altgen/dataset.hpp"

#include "altgen/binary_io.hpp"
#include "altgen/errors.hpp"
#include "json.hpp"

namespace altgen {

namespace {

constexpr std::string_view kMagic = "AGDS";

}  // namespace

void Dataset::validate(std::size_t vocab_size) const {
  auto fail = [](const std::string& what) { throw IntegrityError(IntegrityError::Kind::kCorrupt, what); };
  for (const auto& s : samples) {
    const std::string where = "sample " + std::to_string(s.id) + ": ";
    if (s.labels.size() != num_terms()) fail(where + "label vector length differs from terminology count");
    for (auto y : s.labels) {
      if (y > 1) fail(where + "label outside {0,1}");
    }
    for (TokenId t : s.tokens) {
      if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) fail(where + "token id outside vocabulary");
    }
    if ((s.kind == SampleKind::kTransfer) != s.has_image) fail(where + "image presence does not match sample kind");
    if (s.has_image && (s.image.height != grid_height || s.image.width != grid_width ||
                        s.image.channels != channels ||
                        s.image.values.size() != grid_height * grid_width * channels)) {
      fail(where + "image shape differs from dataset grid");
    }
  }
}

Dataset tokenize_split(const std::string& split, std::span<const RawSample> raw, const Vocabulary& vocab,
                       const SyntheticGrammar& grammar) {
  Dataset ds;
  ds.split = split;
  ds.vocab_fingerprint = vocab.fingerprint();
  ds.terminology_names = grammar.terminology_names();
  ds.grammar_seed = grammar.seed;
  ds.grammar_hash = grammar.hash();
  ds.grid_height = grammar.grid_height;
  ds.grid_width = grammar.grid_width;
  ds.channels = grammar.channels;
  for (const auto& r : raw) {
    Sample s;
    s.id = r.id;
    s.kind = r.kind;
    s.has_image = r.kind == SampleKind::kTransfer;
    if (s.has_image) s.image = r.image;
    s.labels = r.labels;
    s.tokens = vocab.encode(r.text);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

std::string serialize_dataset(const Dataset& ds) {
  BinaryWriter w;
  for (const auto& s : ds.samples) {
    w.u64(s.id);
    w.u8(static_cast<std::uint8_t>(s.kind));
    w.u8(s.has_image ? 1 : 0);
    if (s.has_image) {
      for (float v : s.image.values) w.f32(v);
    }
    for (auto y : s.labels) w.u8(y);
    w.u32(static_cast<std::uint32_t>(s.tokens.size()));
    for (TokenId t : s.tokens) w.u32(static_cast<std::uint32_t>(t));
  }
  const std::string payload = w.take();
  nlohmann::ordered_json header;
  header["split"] = ds.split;
  header["count"] = ds.samples.size();
  header["vocab_fingerprint"] = ds.vocab_fingerprint;
  header["terminology_names"] = ds.terminology_names;
  header["grammar_seed"] = ds.grammar_seed;
  header["grammar_hash"] = ds.grammar_hash;
  header["grid"] = {{"height", ds.grid_height}, {"width", ds.grid_width}, {"channels", ds.channels}};
  header["payload_sha256"] = sha256_hex(payload);
  return write_container(kMagic, Dataset::kVersion, header.dump(), payload);
}

Dataset parse_dataset(std::string_view bytes) {
  using Kind = IntegrityError::Kind;
  const ContainerView view = read_container(bytes, kMagic, Dataset::kVersion);
  Dataset ds;
  std::size_t count = 0;
  try {
    const auto header = nlohmann::json::parse(view.header);
    ds.split = header.at("split").get<std::string>();
    count = header.at("count").get<std::size_t>();
    ds.vocab_fingerprint = header.at("vocab_fingerprint").get<std::string>();
    ds.terminology_names = header.at("terminology_names").get<std::vector<std::string>>();
    ds.grammar_seed = header.at("grammar_seed").get<std::uint64_t>();
    ds.grammar_hash = header.at("grammar_hash").get<std::string>();
    ds.grid_height = header.at("grid").at("height").get<std::size_t>();
    ds.grid_width = header.at("grid").at("width").get<std::size_t>();
    ds.channels = header.at("grid").at("channels").get<std::size_t>();
    if (header.at("payload_sha256").get<std::string>() != sha256_hex(view.payload)) {
      throw IntegrityError(Kind::kHashMismatch, "dataset payload hash does not match its header");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(Kind::kCorrupt, std::string("dataset header: ") + e.what());
  }
  BinaryReader r(view.payload);
  const std::size_t cells = ds.grid_height * ds.grid_width * ds.channels;
  for (std::size_t i = 0; i < count; ++i) {
    Sample s;
    s.id = r.u64();
    const std::uint8_t kind = r.u8();
    if (kind > 1) throw IntegrityError(Kind::kCorrupt, "unknown sample kind");
    s.kind = static_cast<SampleKind>(kind);
    s.has_image = r.u8() != 0;
    if (s.has_image) {
      s.image = ImageGrid::zeros(ds.grid_height, ds.grid_width, ds.channels);
      for (std::size_t k = 0; k < cells; ++k) s.image.values[k] = r.f32();
    }
    s.labels.resize(ds.num_terms());
    for (auto& y : s.labels) y = r.u8();
    s.tokens.resize(r.u32());
    for (auto& t : s.tokens) t = static_cast<TokenId>(r.u32());
    ds.samples.push_back(std::move(s));
  }
  if (!r.at_end()) throw IntegrityError(Kind::kCorrupt, "dataset payload has trailing bytes");
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) { write_file(path, serialize_dataset(ds)); }

Dataset load_dataset(const std::filesystem::path& path) { return parse_dataset(read_file(path)); }

std::string dataset_sidecar(const Dataset& ds, const Vocabulary& vocab) {
  std::string out;
  for (const auto& s : ds.samples) {
    nlohmann::ordered_json j;
    j["id"] = s.id;
    j["kind"] = s.kind == SampleKind::kTransfer ? "transfer" : "pretrain";
    std::vector<std::string> terms;
    for (std::size_t i = 0; i < s.labels.size(); ++i) {
      if (s.labels[i]) terms.push_back(ds.terminology_names[i]);
    }
    j["terminologies"] = terms;
    j["text"] = vocab.decode(s.tokens);
    out += j.dump() + "\n";
  }
  return out;
}

DatasetSummary summarize(const Dataset& ds) {
  DatasetSummary sum;
  sum.samples = ds.samples.size();
  sum.label_prevalence.assign(ds.num_terms(), 0.0);
  for (const auto& s : ds.samples) {
    for (TokenId t : s.tokens) {
      if (t == kBos || t == kEos || t == kPad) continue;
      ++sum.tokens;
      if (t == kUnk) ++sum.unknown_tokens;
    }
    for (std::size_t i = 0; i < s.labels.size(); ++i) sum.label_prevalence[i] += s.labels[i];
  }
  if (sum.samples > 0) {
    for (auto& p : sum.label_prevalence) p /= static_cast<double>(sum.samples);
  }
  return sum;
}

}  // namespace altgen
