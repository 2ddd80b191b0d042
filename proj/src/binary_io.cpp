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

#include "altgen/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/sha.h>

#include "altgen/errors.hpp"

namespace altgen {

void BinaryWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void BinaryWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void BinaryWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void BinaryWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.append(s);
}

std::string_view BinaryReader::bytes(std::size_t n) {
  if (n > remaining()) {
    throw IntegrityError(IntegrityError::Kind::kTruncated,
                         "unexpected end of data: wanted " + std::to_string(n) + " bytes at offset " +
                             std::to_string(pos_) + ", " + std::to_string(remaining()) + " left");
  }
  std::string_view out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint8_t BinaryReader::u8() { return static_cast<std::uint8_t>(bytes(1)[0]); }

std::uint32_t BinaryReader::u32() {
  auto b = bytes(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

std::uint64_t BinaryReader::u64() {
  auto b = bytes(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  return v;
}

float BinaryReader::f32() { return std::bit_cast<float>(u32()); }

std::string BinaryReader::str() {
  const std::uint32_t n = u32();
  return std::string(bytes(n));
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned char c : digest) out << std::setw(2) << static_cast<int>(c);
  return out.str();
}

std::string write_container(std::string_view magic, std::uint32_t version, std::string_view header,
                            std::string_view payload) {
  BinaryWriter w;
  w.bytes(magic);
  w.u32(version);
  w.str(header);
  w.u64(payload.size());
  w.bytes(payload);
  std::string out = w.take();
  out += sha256_hex(out);
  return out;
}

ContainerView read_container(std::string_view bytes, std::string_view magic, std::uint32_t version) {
  using Kind = IntegrityError::Kind;
  constexpr std::size_t kDigestChars = 64;
  BinaryReader r(bytes);
  if (bytes.size() < magic.size()) throw IntegrityError(Kind::kTruncated, "file shorter than its magic bytes");
  if (r.bytes(magic.size()) != magic) {
    throw IntegrityError(Kind::kBadMagic, "expected magic '" + std::string(magic) + "'");
  }
  const std::uint32_t found = r.u32();
  if (found != version) {
    throw IntegrityError(Kind::kVersionMismatch,
                         "format version " + std::to_string(found) + ", expected " + std::to_string(version));
  }
  ContainerView view;
  const std::uint32_t header_len = r.u32();
  view.header = r.bytes(header_len);
  const std::uint64_t payload_len = r.u64();
  if (payload_len > r.remaining()) {
    throw IntegrityError(Kind::kTruncated, "payload of " + std::to_string(payload_len) + " bytes but only " +
                                               std::to_string(r.remaining()) + " remain");
  }
  view.payload = r.bytes(static_cast<std::size_t>(payload_len));
  const std::size_t body = r.position();
  if (r.remaining() < kDigestChars) throw IntegrityError(Kind::kTruncated, "missing integrity trailer");
  if (r.remaining() > kDigestChars) throw IntegrityError(Kind::kCorrupt, "trailing bytes after integrity trailer");
  if (r.bytes(kDigestChars) != sha256_hex(bytes.substr(0, body))) {
    throw IntegrityError(Kind::kHashMismatch, "content hash does not match");
  }
  return view;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path.string() + "'");
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace altgen
