// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

// Reconstruction quality of the autoencoder trained to convergence on a small
// corpus. Slow (trains a real model); kept out of the fast unit suites.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lpmrf/toy/faces.hpp"
#include "lpmrf/vae/train.hpp"

using namespace lpmrf;
using namespace lpmrf::vae;

TEST_CASE("200-image corpus trained to convergence reconstructs above 30 dB held out") {
    const auto train = toy::generate_corpus(200, 16, 901);
    const auto held_out = toy::generate_corpus(50, 16, 902);

    SimVAEConfig cfg;
    cfg.base_channels = 24;
    cfg.channel_multipliers = {1, 2, 2};
    cfg.blocks_per_stage = 2;
    cfg.latent_channels = 16;
    cfg.downsample_factor = 4;
    cfg.perceptual_weight = 0.0;
    SimVae<float> model(cfg, 11);

    VaeTrainConfig tc;
    tc.steps = 3500;
    tc.batch_size = 8;
    tc.schedule = {2e-3, 5e-5, 2e-4, 100, 3500, true};
    tc.seed = 7;
    const auto curve = train_vae(model, train, tc);
    CHECK(curve.back().loss < curve.front().loss);

    const double psnr = reconstruction_psnr(model, held_out);
    MESSAGE("held-out reconstruction psnr: ", psnr, " dB");
    CHECK(psnr > 30.0);

    // reconstruction of a constant image stays near-constant
    Tensor<float> flat = Tensor<float>::full({1, 3, 16, 16}, 0.5f);
    const Tensor<float> recon = model.decode(model.encode_mean(flat));
    double mean = 0.0;
    for (int64_t i = 0; i < recon.numel(); ++i) mean += recon[i];
    mean /= double(recon.numel());
    double var = 0.0;
    for (int64_t i = 0; i < recon.numel(); ++i) {
        const double d = recon[i] - mean;
        var += d * d;
    }
    CHECK(std::sqrt(var / double(recon.numel())) < 0.05);
}
