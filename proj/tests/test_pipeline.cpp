// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "lpmrf/io/png_io.hpp"
#include "lpmrf/pipeline/pipeline.hpp"
#include "lpmrf/toy/faces.hpp"

using namespace lpmrf;
using namespace lpmrf::pipeline;

namespace {

RestorationSystem tiny_system(Space space, uint64_t seed) {
    RestorationSystem sys;
    sys.space = space;

    pm::PmNetConfig pcfg;
    pcfg.base_channels = 8;
    pcfg.channel_multipliers = {1, 2};
    sys.posterior_mean = pm::PmUNet<float>(pcfg, seed);

    flow::VelocityNetConfig vcfg;
    vcfg.state_channels = space == Space::Pixel ? 3 : 4;
    vcfg.base_channels = 8;
    vcfg.channel_multipliers = {1, 2};
    sys.velocity = flow::ConvVelocityNet<float>(vcfg, seed + 1);

    if (space == Space::Latent) {
        vae::SimVAEConfig cfg;
        cfg.base_channels = 8;
        cfg.channel_multipliers = {1, 2};
        cfg.blocks_per_stage = 1;
        cfg.latent_channels = 4;
        cfg.downsample_factor = 2;
        sys.vae_model = vae::SimVae<float>(cfg, seed + 2);
        // non-trivial latent statistics so normalization is exercised
        Tensor<float> m({4}), s({4});
        for (int i = 0; i < 4; ++i) {
            m[i] = 0.1f * float(i) - 0.15f;
            s[i] = 0.5f + 0.3f * float(i);
        }
        sys.vae_model->set_latent_norm(m, s);
    }
    return sys;
}

}  // namespace

TEST_CASE("zero-velocity restore equals the distortion-bound reference, bit-exact") {
    const Image y = toy::toy_face(16, 5);
    for (Space space : {Space::Pixel, Space::Latent}) {
        RestorationSystem sys = tiny_system(space, 7);
        const Image restored = sys.restore(y);
        const Image reference = sys.zero_velocity_reference(y);
        CHECK(max_abs_diff(restored, reference) == 0.0);
        if (space == Space::Pixel)
            CHECK(max_abs_diff(restored, sys.posterior_only(y)) == 0.0);
    }
}

TEST_CASE("restore is deterministic") {
    RestorationSystem sys = tiny_system(Space::Latent, 9);
    const Image y = toy::toy_face(16, 6);
    CHECK(max_abs_diff(sys.restore(y), sys.restore(y)) == 0.0);
}

TEST_CASE("normalized velocity wrapper implements the change of variables") {
    RestorationSystem sys = tiny_system(Space::Latent, 11);
    // make the net non-zero
    std::vector<nn::NamedParam<float>> ps;
    sys.velocity.params(ps);
    Rng r(12);
    for (auto& np : ps)
        if (np.name == "flow.out_conv.weight" || np.name == "flow.out_conv.bias")
            for (int64_t i = 0; i < np.param->value.numel(); ++i)
                np.param->value[i] = float(0.05 * r.normal());

    const Tensor<float>& m = sys.vae_model->latent_norm_mean();
    const Tensor<float>& s = sys.vae_model->latent_norm_std();
    NormalizedVelocity wrapped(sys.velocity, m, s);

    Tensor<float> z = Tensor<float>::randn({2, 4, 8, 8}, r);
    const int steps = 8;

    // raw-space euler with the wrapper
    Tensor<float> raw = flow::sample_euler<float>(wrapped, z, steps);

    // normalized-space euler mapped back
    Tensor<float> zn = z;
    for (int ni = 0; ni < 2; ++ni)
        for (int c = 0; c < 4; ++c)
            for (int i = 0; i < 64; ++i) {
                float& v = zn.data()[(int64_t(ni) * 4 + c) * 64 + i];
                v = (v - m[c]) / s[c];
            }
    Tensor<float> out = flow::sample_euler<float>(sys.velocity, zn, steps);
    for (int ni = 0; ni < 2; ++ni)
        for (int c = 0; c < 4; ++c)
            for (int i = 0; i < 64; ++i) {
                float& v = out.data()[(int64_t(ni) * 4 + c) * 64 + i];
                v = v * s[c] + m[c];
            }
    CHECK(max_abs_diff(raw, out) < 1e-4);
}

TEST_CASE("option gaps: identity codec gives zero for both options") {
    auto codec = make_identity_codec();
    std::vector<PosteriorPoint> posterior{{{0.3, -0.2}, 0.25}, {{0.9, 0.4}, 0.75}};
    const OptionGaps gaps = source_option_gap(*codec, posterior);
    CHECK(gaps.gap1 == 0.0);
    CHECK(gaps.gap2 == 0.0);
}

TEST_CASE("option gaps: linear invertible codec commutes with expectation") {
    auto codec = make_linear_codec(4, 99);
    std::vector<PosteriorPoint> posterior{
        {{0.3, -0.2, 1.0, 0.0}, 0.2}, {{-0.5, 0.8, 0.1, 0.4}, 0.5}, {{0.0, 0.3, -0.7, 1.2}, 0.3}};
    const OptionGaps gaps = source_option_gap(*codec, posterior);
    CHECK(gaps.gap1 < 1e-10);
    CHECK(gaps.gap2 < 1e-10);
}

TEST_CASE("option gaps: cubic codec separates the two source options") {
    auto codec = make_cubic_codec();
    // asymmetric two-point posterior on {-1, +1}
    const double w_neg = 0.2;
    std::vector<PosteriorPoint> posterior{{{-1.0}, w_neg}, {{1.0}, 1.0 - w_neg}};
    const OptionGaps gaps = source_option_gap(*codec, posterior);

    // encode(+-1) = +-1, so the latent posterior mean is m = 1 - 2 w_neg and
    // option (1) decodes to cbrt(m); option (2) reconstructs x_hat = m exactly
    const double m = 1.0 - 2.0 * w_neg;
    const double gap1_closed = (std::cbrt(m) - m) * (std::cbrt(m) - m);
    CHECK(gaps.gap2 < 1e-20);
    CHECK(gaps.gap1 > 0.01);
    CHECK(gaps.gap1 == doctest::Approx(gap1_closed).epsilon(1e-12));

    CHECK_THROWS_AS(source_option_gap(*codec, {}), ParamError);
}

TEST_CASE("bundle save and load round trip") {
    namespace fs = std::filesystem;
    const std::string dir = "/tmp/lpmrf_test_bundle";
    fs::remove_all(dir);

    RestorationSystem sys = tiny_system(Space::Latent, 21);
    sys.save_bundle(dir, "toy");
    RestorationSystem back = RestorationSystem::load_bundle(dir + "/toy.bundle.json");

    const Image y = toy::toy_face(16, 8);
    CHECK(max_abs_diff(sys.restore(y), back.restore(y)) == 0.0);
    fs::remove_all(dir);

    CHECK_THROWS_AS(RestorationSystem::load_bundle("/tmp/missing_bundle.json"), DependencyError);
}

TEST_CASE("trained-vae gap2 equals the reconstruction error (distortion bound)") {
    RestorationSystem sys = tiny_system(Space::Latent, 71);
    const Image x_hat = toy::toy_face(16, 9);
    const double gap2 = image_gap2(*sys.vae_model, x_hat);

    // independent route through the public encode/decode ops
    Tensor<float> batch({1, 3, 16, 16});
    std::copy(x_hat.data(), x_hat.data() + x_hat.numel(), batch.data());
    const Tensor<float> recon = sys.vae_model->decode(sys.vae_model->encode_mean(batch));
    double want = 0.0;
    for (int64_t i = 0; i < batch.numel(); ++i) {
        const double d = double(recon[i]) - double(batch[i]);
        want += d * d;
    }
    CHECK(gap2 == doctest::Approx(want).epsilon(1e-12));
    CHECK(gap2 >= 0.0);
}

TEST_CASE("endpoint pair preparation produces matched shapes in both spaces") {
    auto hq = toy::generate_corpus(6, 16, 31);
    degradation::DegradationRanges ranges;
    ranges.blur_sigma_max = 1.0;
    ranges.scale_factor_max = 2.0;
    ranges.jpeg_quality.reset();

    RestorationSystem sys = tiny_system(Space::Latent, 41);
    const EndpointPairs pixel =
        prepare_endpoint_pairs(Space::Pixel, nullptr, sys.posterior_mean, hq, ranges, 3);
    CHECK(pixel.z0.shape() == std::vector<int>{6, 3, 16, 16});
    CHECK(pixel.z1.shape() == pixel.z0.shape());

    const EndpointPairs latent =
        prepare_endpoint_pairs(Space::Latent, &*sys.vae_model, sys.posterior_mean, hq, ranges, 3);
    CHECK(latent.z0.shape() == std::vector<int>{6, 4, 8, 8});

    // determinism of the degradation draw
    const EndpointPairs again =
        prepare_endpoint_pairs(Space::Pixel, nullptr, sys.posterior_mean, hq, ranges, 3);
    CHECK(max_abs_diff(again.z0, pixel.z0) == 0.0);
}

TEST_CASE("system training with curve produces finite validation rows") {
    auto hq = toy::generate_corpus(8, 16, 51);
    auto val_hq = toy::generate_corpus(6, 16, 52);
    degradation::DegradationRanges ranges;
    ranges.blur_sigma_max = 1.0;
    ranges.scale_factor_max = 2.0;
    ranges.jpeg_quality.reset();
    const auto val_lq = degrade_set(val_hq, ranges, 7);

    RestorationSystem sys = tiny_system(Space::Pixel, 61);
    const EndpointPairs pairs =
        prepare_endpoint_pairs(Space::Pixel, nullptr, sys.posterior_mean, hq, ranges, 9);

    features::FeatureExtractor<float> extractor(3, 16, 77);
    flow::FlowTrainConfig fcfg;
    fcfg.steps = 20;
    fcfg.batch_size = 4;
    fcfg.seed = 5;
    const SystemCurve curve = train_system_with_curve(
        Space::Pixel, nullptr, sys.posterior_mean, sys.velocity, pairs, val_lq, val_hq, extractor,
        fcfg, /*val_every=*/10);

    REQUIRE(curve.rows.size() >= 2);
    for (const auto& r : curve.rows) {
        CHECK(std::isfinite(r.fd));
        CHECK(std::isfinite(r.mmd2));
        CHECK(r.psnr > 0.0);
    }
    CHECK(curve.first_step_reaching(1e300) == 0);
    CHECK(curve.first_step_reaching(-1.0) == -1);
}
