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

#include "altgen/patch_embed.hpp"

#include "altgen/errors.hpp"
#include "altgen/layers.hpp"
#include "altgen/ops.hpp"

namespace altgen {

ImageGrid ImageGrid::zeros(std::size_t height, std::size_t width, std::size_t channels) {
  ImageGrid g;
  g.height = height;
  g.width = width;
  g.channels = channels;
  g.values.assign(height * width * channels, 0.0f);
  return g;
}

template <typename T>
PatchEmbedder<T> PatchEmbedder<T>::create(ParameterStore<T>& store, const std::string& prefix, std::size_t height,
                                          std::size_t width, std::size_t channels, std::size_t out_dim,
                                          std::mt19937_64& rng) {
  if (height == 0 || width == 0 || channels == 0 || out_dim == 0) {
    throw ConfigError("patch embedder dimensions must be positive");
  }
  PatchEmbedder p;
  p.height = height;
  p.width = width;
  p.channels = channels;
  p.weight = store.add_normal(prefix + ".w", {channels, out_dim}, glorot_stddev(channels, out_dim), rng);
  p.bias = store.add_zeros(prefix + ".b", {out_dim});
  return p;
}

template <typename T>
VisualContext<T> PatchEmbedder<T>::apply(const ImageGrid& image) const {
  if (image.height != height || image.width != width || image.channels != channels ||
      image.values.size() != height * width * channels) {
    throw ContractError("image grid " + std::to_string(image.height) + "x" + std::to_string(image.width) + "x" +
                        std::to_string(image.channels) + " does not match patch embedder " +
                        std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(channels));
  }
  Tensor<T> cells({height * width, channels}, std::vector<T>(image.values.begin(), image.values.end()));
  return {linear(cells, weight, bias), height, width};
}

template struct PatchEmbedder<float>;
template struct PatchEmbedder<double>;

}  // namespace altgen
