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

#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "uniparam/param_store.hpp"
#include "uniparam/quantizer.hpp"
#include "uniparam/rng.hpp"

namespace uniparam {

namespace {
Vector random_values(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  return v;
}
}  // namespace

TEST_CASE("read returns raw values when QAT is off") {
  const ParamStorePtr store = make_param_store("s", random_values(20, 1));
  const Vector r = store->read();
  for (Index i = 0; i < 20; ++i) CHECK(r[i] == store->raw()[i]);
  CHECK(store->trainable_count() == 20);
}

TEST_CASE("QAT routes reads through fake quantization") {
  const ParamStorePtr store = make_param_store("s", random_values(20, 2));
  QuantConfig cfg;
  cfg.bits = 3;
  cfg.group_size = 8;
  store->set_qat(cfg);
  const Vector r = store->read();
  const Vector expected = quantize_dequantize(store->raw(), cfg);
  for (Index i = 0; i < 20; ++i) CHECK(r[i] == expected[i]);
  CHECK((r - store->raw()).cwiseAbs().maxCoeff() > 0.0);  // 3 bits must move something
}

TEST_CASE("SurrogateForwardGuard bypasses the quantizer") {
  const ParamStorePtr store = make_param_store("s", random_values(20, 3));
  QuantConfig cfg;
  cfg.bits = 2;
  cfg.group_size = 8;
  store->set_qat(cfg);
  CHECK_FALSE(SurrogateForwardGuard::active());
  {
    SurrogateForwardGuard guard;
    CHECK(SurrogateForwardGuard::active());
    const Vector r = store->read();
    for (Index i = 0; i < 20; ++i) CHECK(r[i] == store->raw()[i]);
    {
      SurrogateForwardGuard inner;  // re-entrant
      CHECK(SurrogateForwardGuard::active());
    }
    CHECK(SurrogateForwardGuard::active());
  }
  CHECK_FALSE(SurrogateForwardGuard::active());
}

TEST_CASE("gradients accumulate additively per store") {
  const ParamStorePtr store = make_param_store("s", Vector::Zero(4));
  GradMap grads;
  Vector g1(4);
  g1 << 1, 2, 3, 4;
  Vector g2(4);
  g2 << 10, 20, 30, 40;
  accumulate_grad(grads, store.get(), g1);
  accumulate_grad(grads, store.get(), g2);
  const Vector& total = grads.at(store.get());
  CHECK(total[0] == 11.0);
  CHECK(total[3] == 44.0);
}

TEST_CASE("save/load round-trips values, mask, seed, and QAT bit-exactly") {
  const ParamStorePtr store = make_param_store("roundtrip", random_values(33, 4));
  store->trainable()[5] = 0;
  store->trainable()[6] = 0;
  store->seed = 0xdeadbeefcafef00dULL;
  store->meta = {{"kind", "unit-test"}, {"rows", 3}};
  QuantConfig cfg;
  cfg.bits = 5;
  cfg.group_size = 16;
  store->set_qat(cfg);

  const std::filesystem::path path =
      std::filesystem::temp_directory_path() / "uniparam_store_test.bin";
  save_param_store(*store, path);
  const ParamStorePtr back = load_param_store(path);

  CHECK(back->name() == "roundtrip");
  REQUIRE(back->size() == 33);
  for (Index i = 0; i < 33; ++i) CHECK(back->raw()[i] == store->raw()[i]);
  CHECK_FALSE(back->is_trainable(5));
  CHECK_FALSE(back->is_trainable(6));
  CHECK(back->is_trainable(7));
  CHECK(back->seed == store->seed);
  CHECK(back->meta.value("kind", "") == "unit-test");
  REQUIRE(back->qat().has_value());
  CHECK(back->qat()->bits == 5);
  CHECK(back->qat()->group_size == 16);

  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
}

TEST_CASE("loading a missing file reports an IO error") {
  CHECK_THROWS_AS((void)load_param_store("/nonexistent/uniparam_store.bin"),
                  std::runtime_error);
}

}  // namespace uniparam
