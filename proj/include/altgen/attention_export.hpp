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


// Serialized encoder attention maps.
//
// Binary layout, little-endian:
//   "AGAT" | version u32 | branch u8 | layers u32 | heads u32 | seq_len u32 |
//   boundary u32 | seq_len labels (u32 length + UTF-8) |
//   weights f32[layers][heads][seq_len][seq_len] |
//   logits  f32[layers][heads][seq_len][seq_len]   (masked entries are -inf)

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "altgen/layers.hpp"
#include "altgen/terminology_encoder.hpp"

namespace altgen {

struct AttentionExport {
  static constexpr std::uint32_t kVersion = 1;

  Branch branch = Branch::kVisual;
  std::size_t layers = 0;
  std::size_t heads = 0;
  std::size_t seq_len = 0;
  std::size_t boundary = 0;
  std::vector<std::string> labels;
  std::vector<float> weights;
  std::vector<float> logits;

  std::size_t index(std::size_t l, std::size_t h, std::size_t r, std::size_t c) const {
    return ((l * heads + h) * seq_len + r) * seq_len + c;
  }
  float weight(std::size_t l, std::size_t h, std::size_t r, std::size_t c) const { return weights[index(l, h, r, c)]; }
};

// Throws ContractError when the recorder holds nothing, i.e. the forward pass
// ran without recording.
AttentionExport collect_attention(Branch branch, std::size_t boundary, std::vector<std::string> labels,
                                  const AttentionRecorder& recorder);

template <typename T>
AttentionExport collect_attention(const UnifiedFeatures<T>& unified, const AttentionRecorder& recorder) {
  return collect_attention(unified.branch, unified.boundary, unified.labels, recorder);
}

std::string serialize_attention(const AttentionExport& att);
AttentionExport parse_attention(std::string_view bytes);

// Every matrix as labelled rows of decimals.
std::string attention_text_dump(const AttentionExport& att);

// For each terminology row, the k context positions with the largest weight
// in the last layer, averaged over heads.
std::string attention_topk_summary(const AttentionExport& att, std::size_t k);

}  // namespace altgen
