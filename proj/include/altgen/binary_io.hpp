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
#include <string>
#include <string_view>

namespace altgen {

// Little-endian byte sink for the binary container formats.
class BinaryWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void bytes(std::string_view raw) { buf_.append(raw); }
  // u32 length prefix followed by the raw bytes.
  void str(std::string_view s);

  const std::string& data() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

// Reads what BinaryWriter wrote; running off the end is an
// IntegrityError(kTruncated).
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  std::string_view bytes(std::size_t n);
  std::string str();

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string sha256_hex(std::string_view data);

// Framing shared by the dataset and checkpoint files:
//   magic (4 bytes) | version u32 | header u32-length-prefixed UTF-8 |
//   payload u64-length-prefixed bytes | SHA-256 hex of everything before it
std::string write_container(std::string_view magic, std::uint32_t version, std::string_view header,
                            std::string_view payload);

struct ContainerView {
  std::string_view header;
  std::string_view payload;
};

// Checks in order: magic (kBadMagic), version (kVersionMismatch), declared
// sizes (kTruncated / kCorrupt), trailing hash (kHashMismatch). The views
// point into `bytes`.
ContainerView read_container(std::string_view bytes, std::string_view magic, std::uint32_t version);

// IoError on failure. write_file creates missing parent directories.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view data);

}  // namespace altgen
