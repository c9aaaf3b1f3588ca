// Copyright 2026 The uniparam developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "uniparam/param_store.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace uniparam {

namespace {

thread_local int surrogate_depth = 0;

}  // namespace

ParamStore::ParamStore(std::string name, Vector values)
    : name_(std::move(name)),
      values_(std::move(values)),
      trainable_(static_cast<std::size_t>(values_.size()), 1) {}

Vector ParamStore::read() const {
  if (qat_.has_value() && !SurrogateForwardGuard::active()) {
    return quantize_dequantize(values_, *qat_);
  }
  return values_;
}

Index ParamStore::trainable_count() const {
  Index n = 0;
  for (std::uint8_t t : trainable_) n += (t != 0);
  return n;
}

ParamStorePtr make_param_store(std::string name, Vector values) {
  return std::make_shared<ParamStore>(std::move(name), std::move(values));
}

void accumulate_grad(GradMap& grads, const ParamStore* store, const Vector& g) {
  auto it = grads.find(store);
  if (it == grads.end()) {
    grads.emplace(store, g);
  } else {
    it->second += g;
  }
}

SurrogateForwardGuard::SurrogateForwardGuard() { ++surrogate_depth; }
SurrogateForwardGuard::~SurrogateForwardGuard() { --surrogate_depth; }
bool SurrogateForwardGuard::active() { return surrogate_depth > 0; }

void save_param_store(const ParamStore& store, const std::filesystem::path& path) {
  {
    std::ofstream bin(path, std::ios::binary | std::ios::trunc);
    if (!bin) throw std::runtime_error("save_param_store: cannot open " + path.string());
    for (Index i = 0; i < store.size(); ++i) {
      const auto word = std::bit_cast<std::uint64_t>(store.raw()[i]);
      char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((word >> (8 * b)) & 0xff);
      bin.write(bytes, 8);
    }
  }

  nlohmann::json side;
  side["format"] = "param-store-v1";
  side["name"] = store.name();
  side["size"] = store.size();
  side["seed"] = store.seed;
  side["trainable"] = store.trainable();
  if (store.qat().has_value()) {
    side["qat"] = {{"bits", store.qat()->bits},
                   {"group_size", store.qat()->group_size},
                   {"scale_bits", store.qat()->scale_bits},
                   {"kappa", store.qat()->kappa}};
  } else {
    side["qat"] = nullptr;
  }
  side["meta"] = store.meta;

  std::ofstream js(path.string() + ".json", std::ios::trunc);
  if (!js) throw std::runtime_error("save_param_store: cannot open sidecar");
  js << side.dump(2) << '\n';
}

ParamStorePtr load_param_store(const std::filesystem::path& path) {
  std::ifstream js(path.string() + ".json");
  if (!js) throw std::runtime_error("load_param_store: missing sidecar for " + path.string());
  nlohmann::json side = nlohmann::json::parse(js);
  if (side.value("format", "") != "param-store-v1") {
    throw std::runtime_error("load_param_store: unknown sidecar format");
  }
  const auto size = side.at("size").get<Index>();

  Vector values(size);
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("load_param_store: cannot open " + path.string());
  for (Index i = 0; i < size; ++i) {
    char bytes[8];
    if (!bin.read(bytes, 8)) throw std::runtime_error("load_param_store: blob truncated");
    std::uint64_t word = 0;
    for (int b = 0; b < 8; ++b) {
      word |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes[b])) << (8 * b);
    }
    values[i] = std::bit_cast<double>(word);
  }

  auto store = make_param_store(side.at("name").get<std::string>(), std::move(values));
  store->trainable() = side.at("trainable").get<std::vector<std::uint8_t>>();
  if (store->trainable().size() != static_cast<std::size_t>(size)) {
    throw std::runtime_error("load_param_store: mask length mismatch");
  }
  store->seed = side.at("seed").get<std::uint64_t>();
  if (!side.at("qat").is_null()) {
    QuantConfig cfg;
    cfg.bits = side["qat"].at("bits").get<int>();
    cfg.group_size = side["qat"].at("group_size").get<Index>();
    cfg.scale_bits = side["qat"].at("scale_bits").get<int>();
    cfg.kappa = side["qat"].at("kappa").get<double>();
    store->set_qat(cfg);
  }
  store->meta = side.at("meta");
  return store;
}

}  // namespace uniparam
