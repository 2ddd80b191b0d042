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

#include "altgen/errors.hpp"

namespace altgen {

std::string_view to_string(IntegrityError::Kind kind) {
  switch (kind) {
    case IntegrityError::Kind::kTruncated: return "truncated";
    case IntegrityError::Kind::kBadMagic: return "bad-magic";
    case IntegrityError::Kind::kVersionMismatch: return "version-mismatch";
    case IntegrityError::Kind::kHashMismatch: return "hash-mismatch";
    case IntegrityError::Kind::kShapeMismatch: return "shape-mismatch";
    case IntegrityError::Kind::kCorrupt: return "corrupt";
  }
  return "unknown";
}

}  // namespace altgen
