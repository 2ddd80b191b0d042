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

#include <stdexcept>
#include <string>
#include <string_view>

namespace altgen {

// Violated precondition of a library call (bad shape, out-of-range id, ...).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

class DimensionError : public ContractError {
 public:
  explicit DimensionError(const std::string& what) : ContractError(what) {}
};

// Invalid run configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem failure. Maps to exit code 3.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// A dataset or checkpoint file failed validation. Maps to exit code 4.
class IntegrityError : public std::runtime_error {
 public:
  enum class Kind {
    kTruncated,
    kBadMagic,
    kVersionMismatch,
    kHashMismatch,
    kShapeMismatch,
    kCorrupt,
  };

  IntegrityError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(IntegrityError::Kind kind);

// NaN/Inf encountered where finite values are required. Maps to exit code 5.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kContract = 1;
inline constexpr int kConfig = 2;
inline constexpr int kIo = 3;
inline constexpr int kIntegrity = 4;
inline constexpr int kNumeric = 5;
}  // namespace exit_code

}  // namespace altgen
