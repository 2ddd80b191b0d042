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
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "altgen/tensor.hpp"

namespace altgen {

// A named trainable leaf. Names are dotted paths ("decoder.block0.ffn.w1").
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> tensor;
};

// Ordered registry of a model's parameters. Registration order is the
// serialization order.
template <typename T>
class ParameterStore {
 public:
  Tensor<T> add(const std::string& name, Shape shape, std::vector<T> values);
  Tensor<T> add_zeros(const std::string& name, Shape shape);
  Tensor<T> add_constant(const std::string& name, Shape shape, T value);
  Tensor<T> add_normal(const std::string& name, Shape shape, double stddev, std::mt19937_64& rng);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  Tensor<T> get(const std::string& name) const;
  std::size_t size() const { return params_.size(); }
  const std::vector<Parameter<T>>& all() const { return params_; }

  std::vector<std::string> names() const;
  std::vector<std::string> names_with_prefix(std::string_view prefix) const;
  // Parameters touched by the last backward pass.
  std::vector<Parameter<T>> with_grad() const;

  void zero_grad();
  std::size_t total_values() const;

  // Deep copy: fresh leaves holding the same values.
  ParameterStore clone() const;
  void copy_values_from(const ParameterStore& other);

 private:
  std::vector<Parameter<T>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

extern template class ParameterStore<float>;
extern template class ParameterStore<double>;

}  // namespace altgen
