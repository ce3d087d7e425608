// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "lpmrf/core/rng.hpp"
#include "lpmrf/core/serialize.hpp"
#include "lpmrf/core/tensor.hpp"

using namespace lpmrf;

TEST_CASE("rng determinism and stream independence") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Rng c(42), d(43);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += (c.next_u64() == d.next_u64());
    CHECK(same == 0);

    Rng parent(7);
    Rng s1 = parent.split(1);
    Rng s2 = parent.split(2);
    CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("rng normal moments") {
    Rng r(123);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = r.normal();
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("tensor shape and indexing") {
    Tensor<float> t({2, 3, 4, 5});
    CHECK(t.numel() == 120);
    t.at(1, 2, 3, 4) = 7.0f;
    CHECK(t[119] == 7.0f);
    CHECK_THROWS_AS(t.reshaped({7, 17}), ShapeError);
    Tensor<float> r = t.reshaped({6, 20});
    CHECK(r.at(5, 19) == 7.0f);
}

TEST_CASE("checkpoint round trip") {
    Checkpoint ck;
    ck.meta["kind"] = "test";
    ck.meta["seed"] = 77;
    Rng r(5);
    ck.tensors["a.weight"] = Tensor<float>::randn({3, 4}, r);
    ck.tensors["b.bias"] = Tensor<float>::randn({7}, r);

    const std::string path = "/tmp/lpmrf_test_ckpt.bin";
    ck.save(path);
    Checkpoint back = Checkpoint::load(path);
    CHECK(back.meta["kind"] == "test");
    CHECK(back.meta["seed"] == 77);
    REQUIRE(back.tensors.count("a.weight") == 1);
    CHECK(max_abs_diff(back.tensors["a.weight"], ck.tensors["a.weight"]) == 0.0);
    CHECK(max_abs_diff(back.tensors["b.bias"], ck.tensors["b.bias"]) == 0.0);
    std::remove(path.c_str());

    CHECK_THROWS_AS(Checkpoint::load("/tmp/does_not_exist.ckpt"), DependencyError);
}
