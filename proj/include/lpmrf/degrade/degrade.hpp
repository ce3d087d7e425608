// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>

#include <json.hpp>

#include "lpmrf/core/image.hpp"
#include "lpmrf/core/rng.hpp"

namespace lpmrf::degradation {

// Parameters of one degradation draw: blur -> downsample -> noise -> jpeg,
// then upsample back to the input resolution.
struct DegradationParams {
    double blur_sigma = 1.0;
    int blur_kernel_size = 7;
    double scale_factor = 2.0;   // r >= 1
    double noise_sigma = 0.02;   // on the [0,1] intensity scale
    std::optional<int> jpeg_quality;  // nullopt = "none"
    uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static DegradationParams from_json(const nlohmann::json& j);
};

// Kernel size implied by the 3-sigma truncation rule.
int kernel_size_for_sigma(double sigma);

// Uniform sampling ranges used to draw per-sample params during training.
struct DegradationRanges {
    double blur_sigma_min = 0.1, blur_sigma_max = 3.0;
    double scale_factor_min = 1.0, scale_factor_max = 4.0;
    double noise_sigma_min = 0.0, noise_sigma_max = 0.08;
    std::optional<std::pair<int, int>> jpeg_quality{{30, 95}};

    DegradationParams sample(Rng& rng, uint64_t sample_seed) const;
    nlohmann::json to_json() const;
    static DegradationRanges from_json(const nlohmann::json& j);
};

enum class ResampleDir { Down, Up };

Image gaussian_blur(const Image& image, double sigma, int kernel_size);
Image resample(const Image& image, double factor, ResampleDir dir);
Image resample_to(const Image& image, int out_h, int out_w);
Image add_gaussian_noise(const Image& image, double sigma, Rng& rng);
Image jpeg_compress(const Image& image, int quality);

// Full pipeline; a pure function of (image, params) including params.seed.
Image degrade(const Image& image, const DegradationParams& params);

}  // namespace lpmrf::degradation
