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


#include "altgen/checkpoint.hpp"

#include "altgen/binary_io.hpp"
#include "altgen/errors.hpp"

namespace altgen {

namespace {

constexpr std::string_view kMagic = "AGCK";
using Kind = IntegrityError::Kind;

void write_shape(BinaryWriter& w, const Shape& shape) {
  w.u32(static_cast<std::uint32_t>(shape.size()));
  for (auto d : shape) w.u32(static_cast<std::uint32_t>(d));
}

Shape read_shape(BinaryReader& r) {
  const std::uint32_t rank = r.u32();
  if (rank > 8) throw IntegrityError(Kind::kCorrupt, "implausible tensor rank " + std::to_string(rank));
  Shape shape(rank);
  for (auto& d : shape) d = r.u32();
  return shape;
}

std::vector<float> read_floats(BinaryReader& r, std::size_t n) {
  if (n * sizeof(float) > r.remaining()) throw IntegrityError(Kind::kTruncated, "tensor data runs past the payload");
  std::vector<float> v(n);
  for (auto& x : v) x = r.f32();
  return v;
}

}  // namespace

CheckpointContents capture_checkpoint(const Model<float>& model, const AdamState<float>& optimizer,
                                      nlohmann::ordered_json trainer_state, nlohmann::ordered_json provenance) {
  CheckpointContents ck;
  ck.model = model.config();
  ck.trainer_state = std::move(trainer_state);
  ck.provenance = std::move(provenance);
  ck.optimizer = optimizer;
  for (const auto& p : model.parameters().all()) {
    ck.parameters.push_back({p.name, {p.tensor.shape(), {p.tensor.values().begin(), p.tensor.values().end()}}});
  }
  return ck;
}

std::string serialize_checkpoint(const CheckpointContents& ck) {
  BinaryWriter w;
  for (const auto& [name, rec] : ck.parameters) {
    w.str(name);
    write_shape(w, rec.shape);
    for (float v : rec.values) w.f32(v);
  }
  for (const auto& [name, m] : ck.optimizer.moments) {
    w.str(name);
    w.u64(m.updates);
    write_shape(w, {m.first.size()});
    for (float v : m.first) w.f32(v);
    for (float v : m.second) w.f32(v);
  }
  nlohmann::ordered_json header;
  header["model"] = ck.model.to_json();
  header["trainer_state"] = ck.trainer_state;
  header["provenance"] = ck.provenance;
  header["optimizer"] = {{"beta1", ck.optimizer.config.beta1},
                         {"beta2", ck.optimizer.config.beta2},
                         {"epsilon", ck.optimizer.config.epsilon},
                         {"step_count", ck.optimizer.step_count},
                         {"entries", ck.optimizer.moments.size()}};
  header["parameter_count"] = ck.parameters.size();
  return write_container(kMagic, CheckpointContents::kVersion, header.dump(), w.data());
}

CheckpointContents parse_checkpoint(std::string_view bytes) {
  const ContainerView view = read_container(bytes, kMagic, CheckpointContents::kVersion);
  CheckpointContents ck;
  std::size_t param_count = 0, entries = 0;
  try {
    const auto header = nlohmann::ordered_json::parse(view.header);
    ck.model = ModelConfig::from_json(header.at("model"));
    ck.trainer_state = header.at("trainer_state");
    ck.provenance = header.at("provenance");
    const auto& opt = header.at("optimizer");
    ck.optimizer.config.beta1 = opt.at("beta1").get<double>();
    ck.optimizer.config.beta2 = opt.at("beta2").get<double>();
    ck.optimizer.config.epsilon = opt.at("epsilon").get<double>();
    ck.optimizer.step_count = opt.at("step_count").get<std::uint64_t>();
    entries = opt.at("entries").get<std::size_t>();
    param_count = header.at("parameter_count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(Kind::kCorrupt, std::string("checkpoint header: ") + e.what());
  }
  BinaryReader r(view.payload);
  for (std::size_t i = 0; i < param_count; ++i) {
    std::string name = r.str();
    TensorRecord rec;
    rec.shape = read_shape(r);
    rec.values = read_floats(r, shape_numel(rec.shape));
    ck.parameters.emplace_back(std::move(name), std::move(rec));
  }
  for (std::size_t i = 0; i < entries; ++i) {
    std::string name = r.str();
    AdamState<float>::Moments m;
    m.updates = r.u64();
    const Shape shape = read_shape(r);
    if (shape.size() != 1) throw IntegrityError(Kind::kCorrupt, "optimizer entry '" + name + "' is not flat");
    m.first = read_floats(r, shape[0]);
    m.second = read_floats(r, shape[0]);
    ck.optimizer.moments.emplace(std::move(name), std::move(m));
  }
  if (!r.at_end()) throw IntegrityError(Kind::kCorrupt, "checkpoint payload has trailing bytes");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const CheckpointContents& ck) {
  // Write beside the target and rename, so an interrupted save never leaves
  // a half-written checkpoint under the final name.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, serialize_checkpoint(ck));
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at '" + path.string() + "': " + ec.message());
}

CheckpointContents load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_file(path)); }

void restore_checkpoint(const CheckpointContents& ck, Model<float>& model, AdamState<float>* optimizer) {
  if (ck.model.to_json() != model.config().to_json()) {
    throw IntegrityError(Kind::kShapeMismatch, "checkpoint model config differs from the target model");
  }
  auto& store = model.parameters();
  if (ck.parameters.size() != store.size()) {
    throw IntegrityError(Kind::kShapeMismatch, "checkpoint holds " + std::to_string(ck.parameters.size()) +
                                                   " parameters, model has " + std::to_string(store.size()));
  }
  for (const auto& [name, rec] : ck.parameters) {
    if (!store.contains(name)) throw IntegrityError(Kind::kShapeMismatch, "unknown parameter '" + name + "'");
    if (store.get(name).shape() != rec.shape) {
      throw IntegrityError(Kind::kShapeMismatch, "parameter '" + name + "' has shape " + shape_string(rec.shape) +
                                                     ", model expects " + shape_string(store.get(name).shape()));
    }
  }
  if (optimizer) {
    for (const auto& [name, m] : ck.optimizer.moments) {
      if (!store.contains(name) || store.get(name).numel() != m.first.size()) {
        throw IntegrityError(Kind::kShapeMismatch, "optimizer entry '" + name + "' does not match the model");
      }
    }
  }
  for (const auto& [name, rec] : ck.parameters) {
    auto dst = store.get(name).mutable_values();
    std::copy(rec.values.begin(), rec.values.end(), dst.begin());
  }
  if (optimizer) *optimizer = ck.optimizer;
}

Model<float> model_from_checkpoint(const CheckpointContents& ck) {
  Model<float> model = Model<float>::create(ck.model, 0);
  restore_checkpoint(ck, model, nullptr);
  return model;
}

}  // namespace altgen
