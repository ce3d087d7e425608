// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "lpmrf/core/image.hpp"
#include "lpmrf/core/tensor.hpp"

namespace lpmrf::metrics {

// Peak signal-to-noise ratio in dB against peak 1.0, capped at 100 dB.
double psnr(const Image& a, const Image& b);

struct MsSsimConfig {
    int scales = 3;        // desk-scale default; the standard variant uses 5
    int window = 11;
    double window_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
};

// Multi-scale SSIM with power weights renormalized over the scales in use.
// Requires min(H, W) >= 8 * 2^(scales-1).
double ms_ssim(const Image& a, const Image& b, const MsSsimConfig& cfg = {});

// N x d embeddings of one image set under a fixed extractor.
struct FeatureSet {
    Tensor<double> features;  // (N, d)
    std::string extractor_id;

    int count() const { return features.dim(0); }
    int dim() const { return features.dim(1); }
};

// Frechet distance between Gaussian fits:
//   ||mu_A - mu_B||^2 + tr(S_A + S_B - 2 (S_A S_B)^{1/2}).
// Covariances are regularized by eps * I before the matrix square root.
double frechet_distance(const FeatureSet& a, const FeatureSet& b, double eps = 1e-6);

// tr((S_A S_B)^{1/2}) via eigendecomposition of the symmetrized product with
// eigenvalue clamping at zero. Exposed for the closed-form oracle tests.
double trace_sqrt_product(const Tensor<double>& cov_a, const Tensor<double>& cov_b);

// Unbiased U-statistic estimate of squared MMD with kernel
// exp(-||x-y||^2 / (2 sigma^2)); sigma defaults to the median pairwise
// distance of the pooled set. The estimate may dip slightly below zero.
double mmd_rbf(const FeatureSet& a, const FeatureSet& b,
               std::optional<double> bandwidth = std::nullopt);

double median_heuristic_bandwidth(const FeatureSet& a, const FeatureSet& b);

// RMSE of a restored output against the posterior-mean proxy for the same
// input; the fidelity measure used when no ground truth exists.
double ind_rmse(const Image& restored, const Image& pm_proxy);

}  // namespace lpmrf::metrics
