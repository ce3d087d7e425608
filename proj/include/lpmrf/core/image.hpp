// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "lpmrf/core/tensor.hpp"

namespace lpmrf {

// Images are (3, H, W) float tensors with intensities in [0, 1].
using Image = Tensor<float>;

inline void require_image(const Image& x, const char* who) {
    LPMRF_REQUIRE(x.rank() == 3 && x.dim(0) == 3, ShapeError, who,
                  ": expected (3,H,W) image, got ", x.shape_str());
}

inline uint8_t to_u8(float v) {
    const float s = v * 255.0f + 0.5f;
    return uint8_t(s < 0.0f ? 0.0f : (s > 255.0f ? 255.0f : s));
}

// 8-bit quantization round trip (the precision images live at on disk).
inline Image quantize_u8(const Image& x) {
    Image y = x;
    for (int64_t i = 0; i < y.numel(); ++i) y[i] = float(to_u8(x[i])) / 255.0f;
    return y;
}

}  // namespace lpmrf
