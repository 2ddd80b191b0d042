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

#include "altgen/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "altgen/binary_io.hpp"
#include "altgen/errors.hpp"

namespace altgen {

namespace {
const char* const kReserved[] = {"<pad>", "<bos>", "<eos>", "<unk>"};
}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c) && ch != '<' && ch != '>' && ch != '_') {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return out;
}

std::string normalize_text(std::string_view text) {
  std::string out;
  for (const auto& w : split_words(text)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (const char* t : kReserved) add(t);
}

void Vocabulary::add(std::string token) {
  if (index_.count(token)) throw ContractError("duplicate vocabulary entry '" + token + "'");
  index_.emplace(token, static_cast<TokenId>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> sentences) {
  std::set<std::string> words;
  for (const auto& s : sentences) words.insert(s.begin(), s.end());
  Vocabulary v;
  for (const auto& w : words) {
    if (!v.contains(w)) v.add(w);
  }
  return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  if (lines.size() < 4) {
    throw IntegrityError(IntegrityError::Kind::kCorrupt, "vocabulary '" + path.string() + "' lacks reserved tokens");
  }
  for (int i = 0; i < 4; ++i) {
    if (lines[static_cast<std::size_t>(i)] != kReserved[i]) {
      throw IntegrityError(IntegrityError::Kind::kCorrupt,
                           "vocabulary line " + std::to_string(i) + " must be " + kReserved[i]);
    }
  }
  Vocabulary v;
  for (std::size_t i = 4; i < lines.size(); ++i) {
    if (v.contains(lines[i])) {
      throw IntegrityError(IntegrityError::Kind::kCorrupt, "vocabulary repeats token '" + lines[i] + "'");
    }
    v.add(lines[i]);
  }
  return v;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::string out;
  for (const auto& t : tokens_) {
    out += t;
    out.push_back('\n');
  }
  write_file(path, out);
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ContractError("token id " + std::to_string(id) + " outside vocabulary of " + std::to_string(size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

std::vector<TokenId> Vocabulary::encode(std::string_view text) const {
  std::vector<TokenId> ids{kBos};
  for (const auto& w : split_words(text)) ids.push_back(id(w));
  ids.push_back(kEos);
  return ids;
}

std::vector<std::string> Vocabulary::decode_words(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  for (TokenId id : ids) {
    if (id == kBos || id == kEos || id == kPad) continue;
    out.push_back(token(id));
  }
  return out;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (const auto& w : decode_words(ids)) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

std::string Vocabulary::fingerprint() const {
  std::string joined;
  for (const auto& t : tokens_) {
    joined += t;
    joined.push_back('\n');
  }
  return sha256_hex(joined);
}

}  // namespace altgen
