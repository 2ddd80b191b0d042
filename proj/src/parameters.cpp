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

#include "altgen/parameters.hpp"

#include <algorithm>

#include "altgen/errors.hpp"

namespace altgen {

template <typename T>
Tensor<T> ParameterStore<T>::add(const std::string& name, Shape shape, std::vector<T> values) {
  if (name.empty()) throw ContractError("parameter name must not be empty");
  if (contains(name)) throw ContractError("duplicate parameter name '" + name + "'");
  Tensor<T> t(std::move(shape), std::move(values), /*requires_grad=*/true);
  index_.emplace(name, params_.size());
  params_.push_back({name, t});
  return t;
}

template <typename T>
Tensor<T> ParameterStore<T>::add_zeros(const std::string& name, Shape shape) {
  return add_constant(name, std::move(shape), T(0));
}

template <typename T>
Tensor<T> ParameterStore<T>::add_constant(const std::string& name, Shape shape, T value) {
  const std::size_t n = shape_numel(shape);
  return add(name, std::move(shape), std::vector<T>(n, value));
}

template <typename T>
Tensor<T> ParameterStore<T>::add_normal(const std::string& name, Shape shape, double stddev,
                                        std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<T> values(shape_numel(shape));
  for (T& v : values) v = static_cast<T>(dist(rng));
  return add(name, std::move(shape), std::move(values));
}

template <typename T>
Tensor<T> ParameterStore<T>::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
  return params_[it->second].tensor;
}

template <typename T>
std::vector<std::string> ParameterStore<T>::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.name);
  return out;
}

template <typename T>
std::vector<std::string> ParameterStore<T>::names_with_prefix(std::string_view prefix) const {
  std::vector<std::string> out;
  for (const auto& p : params_) {
    if (std::string_view(p.name).starts_with(prefix)) out.push_back(p.name);
  }
  return out;
}

template <typename T>
std::vector<Parameter<T>> ParameterStore<T>::with_grad() const {
  std::vector<Parameter<T>> out;
  for (const auto& p : params_) {
    if (p.tensor.has_grad()) out.push_back(p);
  }
  return out;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

template <typename T>
std::size_t ParameterStore<T>::total_values() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.tensor.numel();
  return n;
}

template <typename T>
ParameterStore<T> ParameterStore<T>::clone() const {
  ParameterStore out;
  for (const auto& p : params_) {
    out.add(p.name, p.tensor.shape(), std::vector<T>(p.tensor.values().begin(), p.tensor.values().end()));
  }
  return out;
}

template <typename T>
void ParameterStore<T>::copy_values_from(const ParameterStore& other) {
  if (other.size() != size()) throw ContractError("parameter stores differ in size");
  for (auto& p : params_) {
    Tensor<T> src = other.get(p.name);
    if (src.shape() != p.tensor.shape()) {
      throw DimensionError("parameter '" + p.name + "' shape " + shape_string(p.tensor.shape()) +
                           " vs " + shape_string(src.shape()));
    }
    std::copy(src.values().begin(), src.values().end(), p.tensor.mutable_values().begin());
  }
}

template class ParameterStore<float>;
template class ParameterStore<double>;

}  // namespace altgen
