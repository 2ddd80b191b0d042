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


#include "altgen/attention_export.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "altgen/binary_io.hpp"
#include "altgen/errors.hpp"

namespace altgen {

namespace {

constexpr std::string_view kMagic = "AGAT";

std::string format_float(float v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", static_cast<double>(v));
  return buf;
}

}  // namespace

AttentionExport collect_attention(Branch branch, std::size_t boundary, std::vector<std::string> labels,
                                  const AttentionRecorder& recorder) {
  if (recorder.layers.empty()) throw ContractError("attention export requested but recording was disabled");
  AttentionExport att;
  att.branch = branch;
  att.layers = recorder.layers.size();
  att.heads = recorder.layers.front().heads;
  att.seq_len = recorder.layers.front().rows;
  att.boundary = boundary;
  if (labels.size() != att.seq_len) {
    throw ContractError("attention export: " + std::to_string(labels.size()) + " labels for sequence of " +
                        std::to_string(att.seq_len));
  }
  att.labels = std::move(labels);
  for (const auto& cap : recorder.layers) {
    if (cap.heads != att.heads || cap.rows != att.seq_len || cap.cols != att.seq_len) {
      throw ContractError("attention export: captures are not square self-attention of one shape");
    }
    att.weights.insert(att.weights.end(), cap.weights.begin(), cap.weights.end());
    att.logits.insert(att.logits.end(), cap.logits.begin(), cap.logits.end());
  }
  return att;
}

std::string serialize_attention(const AttentionExport& att) {
  BinaryWriter w;
  w.bytes(kMagic);
  w.u32(AttentionExport::kVersion);
  w.u8(static_cast<std::uint8_t>(att.branch));
  w.u32(static_cast<std::uint32_t>(att.layers));
  w.u32(static_cast<std::uint32_t>(att.heads));
  w.u32(static_cast<std::uint32_t>(att.seq_len));
  w.u32(static_cast<std::uint32_t>(att.boundary));
  for (const auto& label : att.labels) w.str(label);
  for (float v : att.weights) w.f32(v);
  for (float v : att.logits) w.f32(v);
  return w.take();
}

AttentionExport parse_attention(std::string_view bytes) {
  BinaryReader r(bytes);
  if (r.bytes(kMagic.size()) != kMagic) throw IntegrityError(IntegrityError::Kind::kBadMagic, "not an attention export");
  const std::uint32_t version = r.u32();
  if (version != AttentionExport::kVersion) {
    throw IntegrityError(IntegrityError::Kind::kVersionMismatch,
                         "attention export version " + std::to_string(version));
  }
  AttentionExport att;
  const std::uint8_t branch = r.u8();
  if (branch > 1) throw IntegrityError(IntegrityError::Kind::kCorrupt, "unknown branch tag");
  att.branch = static_cast<Branch>(branch);
  att.layers = r.u32();
  att.heads = r.u32();
  att.seq_len = r.u32();
  att.boundary = r.u32();
  for (std::size_t i = 0; i < att.seq_len; ++i) att.labels.push_back(r.str());
  const std::size_t n = att.layers * att.heads * att.seq_len * att.seq_len;
  if (r.remaining() != 2 * n * sizeof(float)) {
    throw IntegrityError(r.remaining() < 2 * n * sizeof(float) ? IntegrityError::Kind::kTruncated
                                                               : IntegrityError::Kind::kCorrupt,
                         "attention export payload size does not match its header");
  }
  att.weights.resize(n);
  att.logits.resize(n);
  for (auto& v : att.weights) v = r.f32();
  for (auto& v : att.logits) v = r.f32();
  return att;
}

std::string attention_text_dump(const AttentionExport& att) {
  std::ostringstream out;
  out << "branch " << branch_name(att.branch) << " layers " << att.layers << " heads " << att.heads << " seq_len "
      << att.seq_len << " boundary " << att.boundary << "\n";
  for (std::size_t l = 0; l < att.layers; ++l) {
    for (std::size_t h = 0; h < att.heads; ++h) {
      out << "layer " << l << " head " << h << "\n";
      for (std::size_t r = 0; r < att.seq_len; ++r) {
        out << att.labels[r];
        for (std::size_t c = 0; c < att.seq_len; ++c) out << ' ' << format_float(att.weight(l, h, r, c));
        out << "\n";
      }
    }
  }
  return out.str();
}

std::string attention_topk_summary(const AttentionExport& att, std::size_t k) {
  if (att.layers == 0) throw ContractError("attention export is empty");
  const std::size_t l = att.layers - 1;
  const std::size_t context = att.seq_len - att.boundary;
  k = std::min(k, context);
  std::ostringstream out;
  for (std::size_t r = 0; r < att.boundary; ++r) {
    std::vector<double> avg(context, 0.0);
    for (std::size_t h = 0; h < att.heads; ++h) {
      for (std::size_t c = 0; c < context; ++c) avg[c] += att.weight(l, h, r, att.boundary + c);
    }
    std::vector<std::size_t> order(context);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return avg[a] > avg[b]; });
    out << "terminology " << att.labels[r] << " attends most to";
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t c = order[i];
      out << (i ? ", " : " ") << att.labels[att.boundary + c] << " ("
          << format_float(static_cast<float>(avg[c] / static_cast<double>(att.heads))) << ")";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace altgen
