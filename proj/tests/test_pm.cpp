// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lpmrf/pm/pm.hpp"

using namespace lpmrf;
using namespace lpmrf::pm;

namespace {

PmNetConfig small_config() {
    PmNetConfig cfg;
    cfg.base_channels = 8;
    cfg.channel_multipliers = {1, 2};
    cfg.blocks_per_level = 1;
    return cfg;
}

Image random_image(int hw, uint64_t seed) {
    Rng r(seed);
    Image img({3, hw, hw});
    for (int64_t i = 0; i < img.numel(); ++i) img[i] = float(r.uniform());
    return img;
}

}  // namespace

TEST_CASE("prediction is deterministic and shape preserving") {
    PmUNet<float> net(small_config(), 1);
    Image y = random_image(16, 2);
    Image a = predict_posterior_mean(net, y);
    Image b = predict_posterior_mean(net, y);
    CHECK(a.shape() == y.shape());
    CHECK(max_abs_diff(a, b) == 0.0);
    for (int64_t i = 0; i < a.numel(); ++i) {
        CHECK(a[i] >= 0.0f);
        CHECK(a[i] <= 1.0f);
    }
}

TEST_CASE("identity degradation is learned to near-zero test mse") {
    PmNetConfig cfg = small_config();
    cfg.base_channels = 16;
    PmUNet<float> net(cfg, 3);

    std::vector<Image> hq;
    for (int i = 0; i < 8; ++i) {
        // smooth images: constant patches are easy to memorize through conv nets
        Rng r(100 + uint64_t(i));
        Image img({3, 8, 8});
        for (int c = 0; c < 3; ++c) {
            const float base = float(r.uniform(0.2, 0.8));
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    img.at(c, y, x) = base + 0.1f * float(r.uniform()) * float(x) / 8.0f;
        }
        hq.push_back(img);
    }

    degradation::DegradationRanges identity;
    identity.blur_sigma_min = identity.blur_sigma_max = 0.1;  // kernel becomes 1x1
    identity.scale_factor_min = identity.scale_factor_max = 1.0;
    identity.noise_sigma_min = identity.noise_sigma_max = 0.0;
    identity.jpeg_quality.reset();

    PmTrainConfig tc;
    tc.steps = 1600;
    tc.batch_size = 4;
    tc.schedule = {3e-3, 1e-4, 3e-4, 20, 1600, true};
    tc.seed = 4;
    train_posterior_mean(net, hq, identity, tc);

    double mse = 0.0;
    for (const auto& x : hq) {
        Image pred = predict_posterior_mean(net, x);
        mse += mean_squared_error(pred, x);
    }
    mse /= double(hq.size());
    CHECK(mse < 1e-4);
}

TEST_CASE("two-point prior under additive noise approaches the bayes estimator") {
    // 1-pixel toy: X is constant a or b across a (3,1,1) image, Y = clip(X + noise).
    const double a = 0.4, b = 0.6, sigma = 0.05;

    PmNetConfig cfg;
    cfg.base_channels = 16;
    cfg.channel_multipliers = {1};
    cfg.blocks_per_level = 2;
    PmUNet<float> net(cfg, 5);

    PmTrainConfig tc;
    tc.steps = 3000;
    tc.batch_size = 64;
    tc.schedule = nn::LrSchedule::fixed(1e-3, 3000);
    tc.seed = 6;

    auto source = [&](Rng& rng, Tensor<float>& y, Tensor<float>& x) {
        const int n = tc.batch_size;
        x = Tensor<float>({n, 3, 1, 1});
        y = Tensor<float>({n, 3, 1, 1});
        for (int i = 0; i < n; ++i) {
            const double v = rng.uniform() < 0.5 ? a : b;
            for (int c = 0; c < 3; ++c) {
                x.at(i, c, 0, 0) = float(v);
                const double noisy = v + sigma * rng.normal();
                y.at(i, c, 0, 0) = float(std::clamp(noisy, 0.0, 1.0));
            }
        }
    };
    degradation::DegradationRanges unused;
    train_posterior_mean<float>(net, {}, unused, tc, source);

    // closed-form posterior mean given the three independent channel readings
    auto bayes = [&](double y0, double y1, double y2) {
        auto loglik = [&](double mu) {
            const double d0 = y0 - mu, d1 = y1 - mu, d2 = y2 - mu;
            return -(d0 * d0 + d1 * d1 + d2 * d2) / (2.0 * sigma * sigma);
        };
        const double la = loglik(a), lb = loglik(b);
        const double m = std::max(la, lb);
        const double wa = std::exp(la - m), wb = std::exp(lb - m);
        return (a * wa + b * wb) / (wa + wb);
    };

    Rng eval_rng(7);
    double worst = 0.0;
    for (int trial = 0; trial < 64; ++trial) {
        const double v = eval_rng.uniform() < 0.5 ? a : b;
        double ys[3];
        Tensor<float> y({1, 3, 1, 1});
        for (int c = 0; c < 3; ++c) {
            ys[c] = std::clamp(v + sigma * eval_rng.normal(), 0.0, 1.0);
            y.at(0, c, 0, 0) = float(ys[c]);
        }
        const Tensor<float> pred = net.forward(y, nullptr);
        const double want = bayes(ys[0], ys[1], ys[2]);
        double got = 0.0;
        for (int c = 0; c < 3; ++c) got += pred.at(0, c, 0, 0);
        got /= 3.0;
        worst = std::max(worst, std::abs(got - want));
    }
    CHECK(worst < 0.05);
}

TEST_CASE("training lowers test mse below a random initialization (seed sweep)") {
    std::vector<Image> hq;
    for (int i = 0; i < 12; ++i) hq.push_back(random_image(8, 300 + uint64_t(i)));

    degradation::DegradationRanges ranges;
    ranges.blur_sigma_min = 0.3;
    ranges.blur_sigma_max = 1.0;
    ranges.scale_factor_min = 1.0;
    ranges.scale_factor_max = 2.0;
    ranges.noise_sigma_min = 0.0;
    ranges.noise_sigma_max = 0.05;
    ranges.jpeg_quality.reset();

    auto test_mse = [&](PmUNet<float>& net, uint64_t seed) {
        Rng r(seed);
        double acc = 0.0;
        for (size_t i = 0; i < hq.size(); ++i) {
            auto params = ranges.sample(r, 900 + uint64_t(i));
            Image y = degradation::degrade(hq[i], params);
            acc += mean_squared_error(predict_posterior_mean(net, y), hq[i]);
        }
        return acc / double(hq.size());
    };

    int wins = 0;
    for (uint64_t seed = 0; seed < 3; ++seed) {
        PmUNet<float> trained(small_config(), 10 + seed);
        PmUNet<float> random_init(small_config(), 20 + seed);
        PmTrainConfig tc;
        tc.steps = 300;
        tc.batch_size = 4;
        tc.schedule = nn::LrSchedule::fixed(2e-3, 300);
        tc.seed = seed;
        train_posterior_mean(trained, hq, ranges, tc);
        if (test_mse(trained, 55) < test_mse(random_init, 55)) ++wins;
    }
    CHECK(wins == 3);
}

TEST_CASE("posterior-mean checkpoint round trip") {
    PmUNet<float> net(small_config(), 9);
    net.save("/tmp/lpmrf_test_pm.ckpt", {{"steps", 0}});
    PmUNet<float> back = PmUNet<float>::load("/tmp/lpmrf_test_pm.ckpt");
    std::remove("/tmp/lpmrf_test_pm.ckpt");
    Image y = random_image(16, 11);
    CHECK(max_abs_diff(predict_posterior_mean(net, y), predict_posterior_mean(back, y)) == 0.0);
}
