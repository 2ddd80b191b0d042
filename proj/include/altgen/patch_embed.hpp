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

// Synthetic image grids and the learned per-cell projection that turns them
// into visual context vectors.

#pragma once

#include <random>
#include <string>
#include <vector>

#include "altgen/parameters.hpp"

namespace altgen {

// height x width x channels, row-major with channels fastest.
struct ImageGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<float> values;

  std::size_t cells() const { return height * width; }
  float at(std::size_t r, std::size_t c, std::size_t ch) const { return values[(r * width + c) * channels + ch]; }
  float& at(std::size_t r, std::size_t c, std::size_t ch) { return values[(r * width + c) * channels + ch]; }

  static ImageGrid zeros(std::size_t height, std::size_t width, std::size_t channels);
};

template <typename T>
struct VisualContext {
  Tensor<T> grid;  // (height*width) x d_v
  std::size_t height = 0;
  std::size_t width = 0;
};

template <typename T>
struct PatchEmbedder {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  Tensor<T> weight;  // channels x d_v
  Tensor<T> bias;    // d_v

  static PatchEmbedder create(ParameterStore<T>& store, const std::string& prefix, std::size_t height,
                              std::size_t width, std::size_t channels, std::size_t out_dim, std::mt19937_64& rng);

  // The same affine map applied to every cell; throws ContractError when the
  // image shape differs from the configured grid.
  VisualContext<T> apply(const ImageGrid& image) const;
};

}  // namespace altgen
