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

#include "altgen/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "altgen/errors.hpp"

namespace altgen {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapC = Eigen::Map<const RowMat<T>>;
template <typename T>
using Map = Eigen::Map<RowMat<T>>;

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

void require_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                         shape_string(b));
  }
}

template <typename T>
void require_matrix(const Tensor<T>& x, const char* op) {
  if (x.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_string(x.shape()));
  }
}

template <typename T>
bool wants_grad(const NodePtr<T>& n) {
  return n->requires_grad;
}

}  // namespace

namespace detail {

template <typename T>
Tensor<T> make_result(Shape shape, Buffer<T> value, std::vector<NodePtr<T>> parents,
                      std::function<void(Node<T>&)> backward) {
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (grad_enabled()) {
    bool any = std::any_of(parents.begin(), parents.end(),
                           [](const NodePtr<T>& p) { return p->requires_grad; });
    if (any) {
      node->requires_grad = true;
      node->parents = std::move(parents);
      node->backward = std::move(backward);
    }
  }
  return Tensor<T>::from_node(std::move(node));
}

}  // namespace detail

using detail::make_result;

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ for " + shape_string(a.shape()) + " . " +
                         shape_string(b.shape()));
  }
  Buffer<T> out(m * n);
  Map<T>(out.data(), m, n).noalias() = MapC<T>(a.values().data(), m, k) * MapC<T>(b.values().data(), k, n);
  auto pa = a.node(), pb = b.node();
  return make_result<T>({m, n}, std::move(out), {pa, pb}, [pa, pb, m, k, n](Node<T>& self) {
    MapC<T> g(self.grad.data(), m, n);
    if (wants_grad(pa)) {
      Map<T>(pa->grad_buffer().data(), m, k).noalias() += g * MapC<T>(pb->value.data(), k, n).transpose();
    }
    if (wants_grad(pb)) {
      Map<T>(pb->grad_buffer().data(), k, n).noalias() += MapC<T>(pa->value.data(), m, k).transpose() * g;
    }
  });
}

template <typename T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw DimensionError("matmul_nt: inner dimensions differ for " + shape_string(a.shape()) +
                         " . " + shape_string(b.shape()) + "^T");
  }
  Buffer<T> out(m * n);
  Map<T>(out.data(), m, n).noalias() =
      MapC<T>(a.values().data(), m, k) * MapC<T>(b.values().data(), n, k).transpose();
  auto pa = a.node(), pb = b.node();
  return make_result<T>({m, n}, std::move(out), {pa, pb}, [pa, pb, m, k, n](Node<T>& self) {
    MapC<T> g(self.grad.data(), m, n);
    if (wants_grad(pa)) {
      Map<T>(pa->grad_buffer().data(), m, k).noalias() += g * MapC<T>(pb->value.data(), n, k);
    }
    if (wants_grad(pb)) {
      Map<T>(pb->grad_buffer().data(), n, k).noalias() += g.transpose() * MapC<T>(pa->value.data(), m, k);
    }
  });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  require_matrix(x, "linear");
  require_matrix(w, "linear");
  const std::size_t m = x.rows(), k = x.cols(), n = w.cols();
  if (w.rows() != k || bias.numel() != n) {
    throw DimensionError("linear: incompatible shapes " + shape_string(x.shape()) + " . " +
                         shape_string(w.shape()) + " + " + shape_string(bias.shape()));
  }
  Buffer<T> out(m * n);
  Map<T> o(out.data(), m, n);
  o.noalias() = MapC<T>(x.values().data(), m, k) * MapC<T>(w.values().data(), k, n);
  o.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.values().data(), n);
  auto px = x.node(), pw = w.node(), pb = bias.node();
  return make_result<T>({m, n}, std::move(out), {px, pw, pb}, [px, pw, pb, m, k, n](Node<T>& self) {
    MapC<T> g(self.grad.data(), m, n);
    if (wants_grad(px)) {
      Map<T>(px->grad_buffer().data(), m, k).noalias() += g * MapC<T>(pw->value.data(), k, n).transpose();
    }
    if (wants_grad(pw)) {
      Map<T>(pw->grad_buffer().data(), k, n).noalias() += MapC<T>(px->value.data(), m, k).transpose() * g;
    }
    if (wants_grad(pb)) {
      Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(pb->grad_buffer().data(), n) += g.colwise().sum();
    }
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  Buffer<T> out(a.numel());
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  auto pa = a.node(), pb = b.node();
  return make_result<T>(a.shape(), std::move(out), {pa, pb}, [pa, pb](Node<T>& self) {
    for (const auto& p : {pa, pb}) {
      if (!wants_grad(p)) continue;
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  Buffer<T> out(a.numel());
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  auto pa = a.node(), pb = b.node();
  return make_result<T>(a.shape(), std::move(out), {pa, pb}, [pa, pb](Node<T>& self) {
    if (wants_grad(pa)) {
      auto& g = pa->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants_grad(pb)) {
      auto& g = pb->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "mul");
  Buffer<T> out(a.numel());
  auto av = a.values(), bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  auto pa = a.node(), pb = b.node();
  return make_result<T>(a.shape(), std::move(out), {pa, pb}, [pa, pb](Node<T>& self) {
    if (wants_grad(pa)) {
      auto& g = pa->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb->value[i];
    }
    if (wants_grad(pb)) {
      auto& g = pb->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa->value[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  Buffer<T> out(x.values().begin(), x.values().end());
  for (T& v : out) v *= factor;
  auto px = x.node();
  return make_result<T>(x.shape(), std::move(out), {px}, [px, factor](Node<T>& self) {
    auto& g = px->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

template <typename T>
Tensor<T> add_row(const Tensor<T>& x, const Tensor<T>& row) {
  require_matrix(x, "add_row");
  const std::size_t m = x.rows(), n = x.cols();
  if (row.numel() != n) {
    throw DimensionError("add_row: row of shape " + shape_string(row.shape()) +
                         " does not match " + shape_string(x.shape()));
  }
  Buffer<T> out(x.values().begin(), x.values().end());
  auto rv = row.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += rv[j];
  auto px = x.node(), pr = row.node();
  return make_result<T>(x.shape(), std::move(out), {px, pr}, [px, pr, m, n](Node<T>& self) {
    if (wants_grad(px)) {
      auto& g = px->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (wants_grad(pr)) {
      auto& g = pr->grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
    }
  });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Buffer<T> out(x.values().begin(), x.values().end());
  for (T& v : out) v = v > T(0) ? v : T(0);
  auto px = x.node();
  return make_result<T>(x.shape(), std::move(out), {px}, [px](Node<T>& self) {
    auto& g = px->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (px->value[i] > T(0)) g[i] += self.grad[i];
    }
  });
}

template <typename T>
T stable_sigmoid(T z) {
  if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
  const T e = std::exp(z);
  return e / (T(1) + e);
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  Buffer<T> out(x.values().begin(), x.values().end());
  for (T& v : out) v = stable_sigmoid(v);
  auto px = x.node();
  return make_result<T>(x.shape(), out, {px}, [px, out](Node<T>& self) {
    auto& g = px->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * out[i] * (T(1) - out[i]);
  });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw ContractError("softmax: axis " + std::to_string(axis) + " out of range for " +
                        shape_string(x.shape()));
  }
  const Shape& s = x.shape();
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t n = s[axis];
  auto xv = x.values();
  Buffer<T> out(xv.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * n * inner + in;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, xv[base + j * inner]);
      T total = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const T e = std::exp(xv[base + j * inner] - mx);
        out[base + j * inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < n; ++j) out[base + j * inner] /= total;
    }
  }
  auto px = x.node();
  Buffer<T> probs = out;
  return make_result<T>(s, std::move(out), {px},
                        [px, probs = std::move(probs), outer, inner, n](Node<T>& self) {
    auto& g = px->grad_buffer();
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * n * inner + in;
        T dot = 0;
        for (std::size_t j = 0; j < n; ++j) dot += self.grad[base + j * inner] * probs[base + j * inner];
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t idx = base + j * inner;
          g[idx] += probs[idx] * (self.grad[idx] - dot);
        }
      }
    }
  });
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps) {
  const std::size_t d = x.shape().back();
  if (gain.numel() != d || bias.numel() != d) {
    throw DimensionError("layer_norm: last dimension of " + shape_string(x.shape()) +
                         " does not match gain " + shape_string(gain.shape()) + " / bias " +
                         shape_string(bias.shape()));
  }
  const std::size_t rows = x.numel() / d;
  auto xv = x.values(), gv = gain.values(), bv = bias.values();
  Buffer<T> out(xv.size()), xhat(xv.size()), inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xv.data() + r * d;
    T mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= T(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= T(d);
    const T is = T(1) / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const T h = (row[j] - mu) * is;
      xhat[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  auto px = x.node(), pg = gain.node(), pb = bias.node();
  return make_result<T>(x.shape(), std::move(out), {px, pg, pb},
                        [px, pg, pb, xhat = std::move(xhat), inv_std = std::move(inv_std), rows,
                         d](Node<T>& self) {
    const auto& gy = self.grad;
    if (wants_grad(pg)) {
      auto& g = pg->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d; ++j) g[j] += gy[r * d + j] * xhat[r * d + j];
    }
    if (wants_grad(pb)) {
      auto& g = pb->grad_buffer();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < d; ++j) g[j] += gy[r * d + j];
    }
    if (wants_grad(px)) {
      auto& g = px->grad_buffer();
      const auto& gain_v = pg->value;
      for (std::size_t r = 0; r < rows; ++r) {
        T mean_dh = 0, mean_dh_h = 0;
        for (std::size_t j = 0; j < d; ++j) {
          const T dh = gy[r * d + j] * gain_v[j];
          mean_dh += dh;
          mean_dh_h += dh * xhat[r * d + j];
        }
        mean_dh /= T(d);
        mean_dh_h /= T(d);
        for (std::size_t j = 0; j < d; ++j) {
          const T dh = gy[r * d + j] * gain_v[j];
          g[r * d + j] += inv_std[r] * (dh - mean_dh - xhat[r * d + j] * mean_dh_h);
        }
      }
    }
  });
}

template <typename T>
Tensor<T> concat_rows(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw ContractError("concat_rows: nothing to concatenate");
  const std::size_t n = parts.front().cols();
  std::size_t m = 0;
  std::vector<NodePtr<T>> parents;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    if (p.cols() != n) {
      throw DimensionError("concat_rows: column mismatch " + shape_string(parts.front().shape()) +
                           " vs " + shape_string(p.shape()));
    }
    offsets.push_back(m * n);
    m += p.rows();
    parents.push_back(p.node());
  }
  Buffer<T> out;
  out.reserve(m * n);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  auto captured = parents;
  return make_result<T>({m, n}, std::move(out), std::move(parents),
                        [captured = std::move(captured), offsets = std::move(offsets)](Node<T>& self) {
    for (std::size_t k = 0; k < captured.size(); ++k) {
      const auto& p = captured[k];
      if (!wants_grad(p)) continue;
      auto& g = p->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[offsets[k] + i];
    }
  });
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, std::size_t begin, std::size_t end) {
  require_matrix(x, "slice_rows");
  if (begin >= end || end > x.rows()) {
    throw ContractError("slice_rows: invalid range [" + std::to_string(begin) + ", " +
                        std::to_string(end) + ") for " + shape_string(x.shape()));
  }
  const std::size_t n = x.cols();
  auto xv = x.values();
  Buffer<T> out(xv.begin() + begin * n, xv.begin() + end * n);
  auto px = x.node();
  return make_result<T>({end - begin, n}, std::move(out), {px}, [px, begin, n](Node<T>& self) {
    auto& g = px->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[begin * n + i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: " + shape_string(x.shape()) + " -> " + shape_string(shape));
  }
  Buffer<T> out(x.values().begin(), x.values().end());
  auto px = x.node();
  return make_result<T>(std::move(shape), std::move(out), {px}, [px](Node<T>& self) {
    auto& g = px->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, std::span<const std::int32_t> ids) {
  require_matrix(table, "gather_rows");
  if (ids.empty()) throw ContractError("gather_rows: empty id list");
  const std::size_t rows = table.rows(), n = table.cols();
  std::vector<std::int32_t> idx(ids.begin(), ids.end());
  for (std::int32_t id : idx) {
    if (id < 0 || static_cast<std::size_t>(id) >= rows) {
      throw ContractError("gather_rows: id " + std::to_string(id) + " outside table of " +
                          std::to_string(rows) + " rows");
    }
  }
  auto tv = table.values();
  Buffer<T> out(idx.size() * n);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(tv.begin() + static_cast<std::size_t>(idx[i]) * n, n, out.begin() + i * n);
  }
  auto pt = table.node();
  const std::size_t count = idx.size();
  return make_result<T>({count, n}, std::move(out), {pt},
                        [pt, idx = std::move(idx), n](Node<T>& self) {
    auto& g = pt->grad_buffer();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      T* dst = g.data() + static_cast<std::size_t>(idx[i]) * n;
      for (std::size_t j = 0; j < n; ++j) dst[j] += self.grad[i * n + j];
    }
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T total = 0;
  for (T v : x.values()) total += v;
  auto px = x.node();
  return make_result<T>({1}, {total}, {px}, [px](Node<T>& self) {
    auto& g = px->grad_buffer();
    for (T& v : g) v += self.grad[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  return scale(sum(x), T(1) / T(x.numel()));
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, T p, std::mt19937_64& rng) {
  if (p <= T(0)) return x;
  if (p >= T(1)) throw ContractError("dropout probability must be < 1");
  std::bernoulli_distribution keep(1.0 - static_cast<double>(p));
  const T factor = T(1) / (T(1) - p);
  Buffer<T> mask(x.numel());
  for (T& m : mask) m = keep(rng) ? factor : T(0);
  Buffer<T> out(x.values().begin(), x.values().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  auto px = x.node();
  return make_result<T>(x.shape(), std::move(out), {px}, [px, mask = std::move(mask)](Node<T>& self) {
    auto& g = px->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * mask[i];
  });
}

template <typename T>
Tensor<T> cross_entropy_sum(const Tensor<T>& logits, std::span<const std::int32_t> targets,
                            std::int32_t ignore_id) {
  require_matrix(logits, "cross_entropy_sum");
  const std::size_t m = logits.rows(), v = logits.cols();
  if (targets.size() != m) {
    throw ContractError("cross_entropy_sum: " + std::to_string(targets.size()) + " targets for " +
                        std::to_string(m) + " logit rows");
  }
  auto lv = logits.values();
  Buffer<T> probs(m * v);
  double total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::int32_t t = targets[i];
    if (t != ignore_id && (t < 0 || static_cast<std::size_t>(t) >= v)) {
      throw ContractError("cross_entropy_sum: target " + std::to_string(t) + " outside vocabulary of " +
                          std::to_string(v));
    }
    const T* row = lv.data() + i * v;
    T mx = *std::max_element(row, row + v);
    T z = 0;
    for (std::size_t j = 0; j < v; ++j) {
      const T e = std::exp(row[j] - mx);
      probs[i * v + j] = e;
      z += e;
    }
    for (std::size_t j = 0; j < v; ++j) probs[i * v + j] /= z;
    if (t != ignore_id) total += static_cast<double>(mx + std::log(z) - row[t]);
  }
  std::vector<std::int32_t> tgt(targets.begin(), targets.end());
  auto pl = logits.node();
  return make_result<T>({1}, {static_cast<T>(total)}, {pl},
                        [pl, probs = std::move(probs), tgt = std::move(tgt), m, v, ignore_id](Node<T>& self) {
    auto& g = pl->grad_buffer();
    const T up = self.grad[0];
    for (std::size_t i = 0; i < m; ++i) {
      if (tgt[i] == ignore_id) continue;
      for (std::size_t j = 0; j < v; ++j) g[i * v + j] += up * probs[i * v + j];
      g[i * v + static_cast<std::size_t>(tgt[i])] -= up;
    }
  });
}

template <typename T>
Tensor<T> bce_with_logits_mean(const Tensor<T>& logits, std::span<const T> labels) {
  const std::size_t n = logits.numel();
  if (labels.size() != n) {
    throw ContractError("bce_with_logits_mean: " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(n) + " logits");
  }
  for (T y : labels) {
    if (y != T(0) && y != T(1)) throw ContractError("binary label must be 0 or 1, got " + std::to_string(y));
  }
  auto zv = logits.values();
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const T z = zv[i];
    total += static_cast<double>(std::max(z, T(0)) - z * labels[i] + std::log1p(std::exp(-std::abs(z))));
  }
  Buffer<T> y(labels.begin(), labels.end());
  auto pz = logits.node();
  return make_result<T>({1}, {static_cast<T>(total / static_cast<double>(n))}, {pz},
                        [pz, y = std::move(y), n](Node<T>& self) {
    auto& g = pz->grad_buffer();
    const T up = self.grad[0] / T(n);
    for (std::size_t i = 0; i < n; ++i) g[i] += up * (stable_sigmoid(pz->value[i]) - y[i]);
  });
}

#define ALTGEN_INSTANTIATE_OPS(T)                                                                  \
  template Tensor<T> detail::make_result<T>(Shape, Buffer<T>, std::vector<NodePtr<T>>,        \
                                            std::function<void(Node<T>&)>);                        \
  template Tensor<T> matmul<T>(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> matmul_nt<T>(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> linear<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);              \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> scale<T>(const Tensor<T>&, T);                                                \
  template Tensor<T> add_row<T>(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> relu<T>(const Tensor<T>&);                                                    \
  template Tensor<T> sigmoid<T>(const Tensor<T>&);                                                 \
  template Tensor<T> softmax<T>(const Tensor<T>&, std::size_t);                                    \
  template Tensor<T> layer_norm<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);       \
  template Tensor<T> concat_rows<T>(std::span<const Tensor<T>>);                                   \
  template Tensor<T> slice_rows<T>(const Tensor<T>&, std::size_t, std::size_t);                    \
  template Tensor<T> reshape<T>(const Tensor<T>&, Shape);                                          \
  template Tensor<T> gather_rows<T>(const Tensor<T>&, std::span<const std::int32_t>);              \
  template Tensor<T> sum<T>(const Tensor<T>&);                                                     \
  template Tensor<T> mean<T>(const Tensor<T>&);                                                    \
  template Tensor<T> dropout<T>(const Tensor<T>&, T, std::mt19937_64&);                            \
  template Tensor<T> cross_entropy_sum<T>(const Tensor<T>&, std::span<const std::int32_t>,         \
                                          std::int32_t);                                           \
  template Tensor<T> bce_with_logits_mean<T>(const Tensor<T>&, std::span<const T>);                \
  template T stable_sigmoid<T>(T);

ALTGEN_INSTANTIATE_OPS(float)
ALTGEN_INSTANTIATE_OPS(double)

}  // namespace altgen
