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

#include "altgen/adam.hpp"

#include <cmath>

#include "altgen/errors.hpp"

namespace altgen {

template <typename T>
void adam_step(std::span<const Parameter<T>> params, AdamState<T>& state, const LearningRateFn& lr) {
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) throw ContractError("adam_step: parameter '" + p.name + "' has no gradient");
  }
  const AdamConfig& c = state.config;
  for (const auto& p : params) {
    auto& mom = state.moments[p.name];
    Tensor<T> t = p.tensor;
    auto values = t.mutable_values();
    auto grad = t.grad();
    if (mom.first.size() != values.size()) {
      if (mom.updates != 0) {
        throw DimensionError("adam_step: moment buffers for '" + p.name + "' do not match its shape");
      }
      mom.first.assign(values.size(), T(0));
      mom.second.assign(values.size(), T(0));
    }
    ++mom.updates;
    const double step = lr(p.name);
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(mom.updates));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(mom.updates));
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grad[i];
      const double m = c.beta1 * mom.first[i] + (1.0 - c.beta1) * g;
      const double v = c.beta2 * mom.second[i] + (1.0 - c.beta2) * g * g;
      mom.first[i] = static_cast<T>(m);
      mom.second[i] = static_cast<T>(v);
      const double update = step * (m / bc1) / (std::sqrt(v / bc2) + c.epsilon);
      values[i] = static_cast<T>(values[i] - update);
    }
  }
  ++state.step_count;
}

template <typename T>
double clip_grad_norm(std::span<const Parameter<T>> params, double max_norm) {
  double sq = 0;
  for (const auto& p : params) {
    for (T g : p.tensor.grad()) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    const T factor = static_cast<T>(max_norm / norm);
    for (const auto& p : params) {
      Tensor<T> t = p.tensor;
      for (T& g : t.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

template void adam_step<float>(std::span<const Parameter<float>>, AdamState<float>&, const LearningRateFn&);
template void adam_step<double>(std::span<const Parameter<double>>, AdamState<double>&, const LearningRateFn&);
template double clip_grad_norm<float>(std::span<const Parameter<float>>, double);
template double clip_grad_norm<double>(std::span<const Parameter<double>>, double);

}  // namespace altgen
