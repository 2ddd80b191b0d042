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


// Shared test helpers: central finite differences and small fixtures.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "altgen/model.hpp"
#include "altgen/ops.hpp"
#include "altgen/parameters.hpp"

namespace altgen::testing {

struct GradCheck {
  double max_rel_err = 0;
  double max_abs_err = 0;
  std::size_t checked = 0;
};

// |a - n| / max(|a|, |n|, floor)
inline double rel_err(double analytic, double numeric, double floor = 1e-3) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Compares the tape gradient of `loss()` with respect to every entry of
// `inputs` against central differences of the same function.
// Five-point central difference; truncation error is O(h^4).
inline double numeric_derivative(double& x, const std::function<double()>& f, double h = 1e-4) {
  const double saved = x;
  auto at = [&](double offset) {
    x = saved + offset;
    return f();
  };
  const double d = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
  x = saved;
  return d;
}

inline GradCheck grad_check(std::vector<Tensor<double>> inputs, const std::function<Tensor<double>()>& loss,
                            double h = 1e-4) {
  for (auto& t : inputs) t.zero_grad();
  loss().backward();
  GradCheck out;
  const std::function<double()> f = [&] { return loss().item(); };
  for (auto& t : inputs) {
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    auto values = t.mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double numeric = numeric_derivative(values[i], f, h);
      out.max_rel_err = std::max(out.max_rel_err, rel_err(analytic[i], numeric));
      out.max_abs_err = std::max(out.max_abs_err, std::abs(analytic[i] - numeric));
      ++out.checked;
    }
  }
  return out;
}

inline Tensor<double> random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0, bool grad = true) {
  std::normal_distribution<double> dist(0.0, scale);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = dist(rng);
  return Tensor<double>(std::move(shape), std::move(v), grad);
}

// d=8, 2 heads, one encoder layer, one decoder block, 3 terminologies,
// vocabulary of 12, 3x3x2 grid.
inline ModelConfig tiny_model_config() {
  ModelConfig c;
  c.model_dim = 8;
  c.num_heads = 2;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.ffn_dim = 16;
  c.term_dim = 8;
  c.visual_dim = 8;
  c.text_dim = 8;
  c.max_len = 16;
  c.embed_stddev = 0.5;
  c.vocab_size = 12;
  c.terminology_names = {"alpha", "beta", "gamma"};
  c.grid_height = 3;
  c.grid_width = 3;
  c.grid_channels = 2;
  return c;
}

}  // namespace altgen::testing
