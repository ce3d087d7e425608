// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "lpmrf/core/image.hpp"

namespace lpmrf::toy {

// Procedural face-like image: gradient background, elliptical head, two eyes,
// a mouth curve, and bright landmark dots. Deterministic in (seed, index).
Image toy_face(int size, uint64_t seed);

std::vector<Image> generate_corpus(int count, int size, uint64_t seed);

}  // namespace lpmrf::toy
