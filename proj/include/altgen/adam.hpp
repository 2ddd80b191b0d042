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
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "altgen/parameters.hpp"

namespace altgen {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moments persist per parameter name across calls, so a parameter that
// sits out some steps resumes with its own history. Bias correction uses
// the per-parameter update count.
template <typename T>
struct AdamState {
  struct Moments {
    std::vector<T> first;
    std::vector<T> second;
    std::uint64_t updates = 0;
  };

  AdamConfig config;
  std::uint64_t step_count = 0;
  std::map<std::string, Moments> moments;
};

using LearningRateFn = std::function<double(const std::string& name)>;

// One ADAM update over `params`, each of which must carry a gradient from a
// completed backward pass.
template <typename T>
void adam_step(std::span<const Parameter<T>> params, AdamState<T>& state, const LearningRateFn& lr);

template <typename T>
void adam_step(std::span<const Parameter<T>> params, AdamState<T>& state, double lr) {
  adam_step<T>(params, state, [lr](const std::string&) { return lr; });
}

// Rescales gradients in place so their joint L2 norm is at most `max_norm`.
// Returns the norm before clipping.
template <typename T>
double clip_grad_norm(std::span<const Parameter<T>> params, double max_norm);

}  // namespace altgen
