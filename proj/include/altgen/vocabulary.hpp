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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace altgen {

using TokenId = std::int32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;

// Lowercases ASCII letters and splits on whitespace; every punctuation
// character becomes its own token.
std::vector<std::string> split_words(std::string_view text);

// split_words joined by single spaces.
std::string normalize_text(std::string_view text);

class Vocabulary {
 public:
  // Only the four reserved tokens.
  Vocabulary();

  // Reserved tokens first, then every distinct word in lexicographic order.
  static Vocabulary build(std::span<const std::vector<std::string>> sentences);
  // One token per line, line number == id.
  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return tokens_.size(); }
  TokenId id(std::string_view token) const;  // kUnk when absent
  const std::string& token(TokenId id) const;
  bool contains(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  // [BOS, words..., EOS]
  std::vector<TokenId> encode(std::string_view text) const;
  // Drops BOS/EOS/PAD and joins the rest with spaces.
  std::string decode(std::span<const TokenId> ids) const;
  std::vector<std::string> decode_words(std::span<const TokenId> ids) const;

  // SHA-256 over the newline-joined token list.
  std::string fingerprint() const;

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace altgen
