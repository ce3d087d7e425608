// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "lpmrf/features/extractor.hpp"
#include "lpmrf/metrics/metrics.hpp"

using namespace lpmrf;
using namespace lpmrf::metrics;

namespace {

Image random_image(int h, int w, uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
    Rng r(seed);
    Image img({3, h, w});
    for (int64_t i = 0; i < img.numel(); ++i) img[i] = float(r.uniform(lo, hi));
    return img;
}

FeatureSet gaussian_features(int n, int d, const std::vector<double>& mean, uint64_t seed) {
    Rng r(seed);
    FeatureSet s;
    s.extractor_id = "synthetic";
    s.features = Tensor<double>({n, d});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) s.features.at(i, j) = mean[size_t(j)] + r.normal();
    return s;
}

}  // namespace

TEST_CASE("psnr: cap, closed form, symmetry, and scalar oracle") {
    Image a = random_image(16, 16, 1);
    CHECK(psnr(a, a) == 100.0);

    Image base = Image::full({3, 16, 16}, 0.4f);
    Image off = Image::full({3, 16, 16}, 0.5f);
    CHECK(psnr(base, off) == doctest::Approx(20.0).epsilon(1e-6));

    Image b = random_image(16, 16, 2);
    double mse = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        const double d = double(a[i]) - double(b[i]);
        mse += d * d;
    }
    mse /= double(a.numel());
    CHECK(std::abs(psnr(a, b) - 10.0 * std::log10(1.0 / mse)) < 1e-9);
    CHECK(std::abs(psnr(a, b) - psnr(b, a)) < 1e-12);

    Image c({3, 8, 8});
    CHECK_THROWS_AS(psnr(a, c), ShapeError);
}

TEST_CASE("ms-ssim: identity, anti-correlation, size guard") {
    Image a = random_image(32, 32, 3, 0.25f, 0.75f);
    CHECK(ms_ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));

    // structural negative: each pixel replaced by its complement
    Image neg = a;
    for (int64_t i = 0; i < neg.numel(); ++i) neg[i] = 1.0f - neg[i];
    CHECK(ms_ssim(a, neg) < 0.3);

    Image small = random_image(16, 16, 4);
    CHECK_THROWS_AS(ms_ssim(small, small), ParamError);

    MsSsimConfig one;
    one.scales = 1;
    CHECK(ms_ssim(small, small, one) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("single-scale ssim matches an independent direct implementation") {
    Image a = random_image(24, 24, 5, 0.2f, 0.8f);
    Image b = a;
    {
        Rng r(6);
        for (int64_t i = 0; i < b.numel(); ++i)
            b[i] = std::clamp(b[i] + float(0.08 * r.normal()), 0.0f, 1.0f);
    }
    MsSsimConfig cfg;
    cfg.scales = 1;
    const double got = ms_ssim(a, b, cfg);

    // direct route: combined SSIM formula per pixel, own gaussian window
    const int win = 11, rr = 5;
    const double sigma = 1.5, c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    std::vector<double> k(win);
    double ksum = 0.0;
    for (int i = 0; i < win; ++i) {
        k[size_t(i)] = std::exp(-0.5 * (i - rr) * (i - rr) / (sigma * sigma));
        ksum += k[size_t(i)];
    }
    for (auto& v : k) v /= ksum;
    auto reflect = [](int i, int n) {
        if (n == 1) return 0;
        const int p = 2 * (n - 1);
        i = std::abs(i) % p;
        return i < n ? i : p - i;
    };
    const int h = a.dim(1), w = a.dim(2);
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
                for (int dy = -rr; dy <= rr; ++dy)
                    for (int dx = -rr; dx <= rr; ++dx) {
                        const double wgt = k[size_t(dy + rr)] * k[size_t(dx + rr)];
                        const double va = a.at(c, reflect(y + dy, h), reflect(x + dx, w));
                        const double vb = b.at(c, reflect(y + dy, h), reflect(x + dx, w));
                        mx += wgt * va;
                        my += wgt * vb;
                        mxx += wgt * va * va;
                        myy += wgt * vb * vb;
                        mxy += wgt * va * vb;
                    }
                const double vx = mxx - mx * mx, vy = myy - my * my, vxy = mxy - mx * my;
                const double ssim = (2 * mx * my + c1) * (2 * vxy + c2) /
                                    ((mx * mx + my * my + c1) * (vx + vy + c2));
                acc += ssim;
            }
        total += acc / double(h * w);
    }
    const double want = total / 3.0;
    CHECK(std::abs(got - want) < 1e-6);
}

TEST_CASE("frechet distance: zero on identical sets and symmetric") {
    FeatureSet a = gaussian_features(500, 8, std::vector<double>(8, 0.0), 7);
    CHECK(frechet_distance(a, a) < 1e-8);

    FeatureSet b = gaussian_features(400, 8, std::vector<double>(8, 0.5), 8);
    const double ab = frechet_distance(a, b);
    const double ba = frechet_distance(b, a);
    CHECK(ab > 0.0);
    CHECK(std::abs(ab - ba) < 1e-8);
}

TEST_CASE("frechet distance: analytic equal-covariance gaussians") {
    // N(0, I_4) vs N(mu, I_4) with ||mu||^2 = 4 -> FD = 4
    const int n = 100000;
    FeatureSet a = gaussian_features(n, 4, {0, 0, 0, 0}, 11);
    FeatureSet b = gaussian_features(n, 4, {1, 1, 1, 1}, 12);
    const double fd = frechet_distance(a, b);
    CHECK(fd == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("trace sqrt of commuting spd product matches eigenvalue closed form") {
    // diagonal pair
    const int d = 6;
    Tensor<double> da({d, d}), db({d, d});
    std::vector<double> ea{0.5, 1.0, 2.0, 3.0, 0.1, 4.0};
    std::vector<double> eb{1.5, 0.2, 2.5, 1.0, 0.7, 3.0};
    for (int i = 0; i < d; ++i) {
        da.at(i, i) = ea[size_t(i)];
        db.at(i, i) = eb[size_t(i)];
    }
    double want = 0.0;
    for (int i = 0; i < d; ++i) want += std::sqrt(ea[size_t(i)] * eb[size_t(i)]);
    CHECK(std::abs(trace_sqrt_product(da, db) - want) < 1e-8);

    // rotated commuting pair (same eigenvectors)
    Rng r(13);
    Tensor<double> m({d, d});
    for (int64_t i = 0; i < m.numel(); ++i) m[i] = r.normal();
    // orthonormalize by Gram-Schmidt
    std::vector<std::vector<double>> q(d, std::vector<double>(d));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) q[size_t(i)][size_t(j)] = m.at(i, j);
        for (int p = 0; p < i; ++p) {
            double dot = 0.0;
            for (int j = 0; j < d; ++j) dot += q[size_t(i)][size_t(j)] * q[size_t(p)][size_t(j)];
            for (int j = 0; j < d; ++j) q[size_t(i)][size_t(j)] -= dot * q[size_t(p)][size_t(j)];
        }
        double nrm = 0.0;
        for (int j = 0; j < d; ++j) nrm += q[size_t(i)][size_t(j)] * q[size_t(i)][size_t(j)];
        nrm = std::sqrt(nrm);
        for (int j = 0; j < d; ++j) q[size_t(i)][size_t(j)] /= nrm;
    }
    Tensor<double> ra({d, d}), rb({d, d});
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double sa = 0.0, sb = 0.0;
            for (int p = 0; p < d; ++p) {
                sa += q[size_t(p)][size_t(i)] * ea[size_t(p)] * q[size_t(p)][size_t(j)];
                sb += q[size_t(p)][size_t(i)] * eb[size_t(p)] * q[size_t(p)][size_t(j)];
            }
            ra.at(i, j) = sa;
            rb.at(i, j) = sb;
        }
    CHECK(std::abs(trace_sqrt_product(ra, rb) - want) < 1e-8);
}

TEST_CASE("frechet rejects non-finite features") {
    FeatureSet a = gaussian_features(10, 4, {0, 0, 0, 0}, 14);
    FeatureSet bad = a;
    bad.features.at(3, 2) = std::nan("");
    CHECK_THROWS_AS(frechet_distance(a, bad), NumericError);
}

TEST_CASE("frechet handles rank-deficient feature sets via regularization") {
    // all rows identical -> singular covariance; must not hard-fail
    FeatureSet a, b;
    a.features = Tensor<double>({8, 3});
    b.features = Tensor<double>({8, 3});
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 3; ++j) {
            a.features.at(i, j) = 1.0;
            b.features.at(i, j) = 2.0;
        }
    const double fd = frechet_distance(a, b);
    CHECK(std::isfinite(fd));
    CHECK(fd == doctest::Approx(3.0).epsilon(1e-6));  // ||mu_a - mu_b||^2 dominates
}

TEST_CASE("mmd: null concentration and separation") {
    const int n = 2000;
    // same distribution split in two
    FeatureSet pool = gaussian_features(2 * n, 1, {0.0}, 15);
    FeatureSet a, b;
    a.features = Tensor<double>({n, 1});
    b.features = Tensor<double>({n, 1});
    for (int i = 0; i < n; ++i) {
        a.features.at(i, 0) = pool.features.at(i, 0);
        b.features.at(i, 0) = pool.features.at(n + i, 0);
    }
    const double null_mmd = mmd_rbf(a, b);
    CHECK(std::abs(null_mmd) < 3.0 / n);

    FeatureSet shifted = gaussian_features(n, 1, {3.0}, 16);
    CHECK(mmd_rbf(a, shifted) > 0.2);

    CHECK_THROWS_AS(mmd_rbf(a, shifted, 0.0), ParamError);
}

TEST_CASE("mmd closed-form check on two-point sets (kernel at zero distance is 1)") {
    FeatureSet a, b;
    a.features = Tensor<double>({2, 1});  // {0, 0}
    b.features = Tensor<double>({2, 1});
    b.features.at(0, 0) = 1.0;
    b.features.at(1, 0) = 1.0;  // {1, 1}
    // pooled nonzero distances are all 1 -> sigma = 1
    // mmd^2 = k(0) + k(0) - 2 k(1) with k(0) = 1
    const double want = 2.0 - 2.0 * std::exp(-0.5);
    CHECK(mmd_rbf(a, b) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("ind_rmse: trivial values and psnr cross-check") {
    Image a = random_image(16, 16, 17, 0.2f, 0.7f);
    CHECK(ind_rmse(a, a) == 0.0);

    Image off = a;
    for (int64_t i = 0; i < off.numel(); ++i) off[i] += 0.1f;
    CHECK(ind_rmse(off, a) == doctest::Approx(0.1).epsilon(1e-6));

    Image b = random_image(16, 16, 18);
    const double from_psnr = std::sqrt(std::pow(10.0, -psnr(a, b) / 10.0));
    CHECK(std::abs(ind_rmse(a, b) - from_psnr) < 1e-9);
}

TEST_CASE("feature extractor: determinism, pluggability, and metric interop") {
    using features::FeatureExtractor;
    std::vector<Image> imgs;
    for (int i = 0; i < 8; ++i) imgs.push_back(random_image(32, 32, 100 + uint64_t(i)));

    FeatureExtractor<float> fa(3, 64, 42), fb(3, 64, 42), fc(3, 64, 7);
    CHECK(fa.id() == fb.id());
    CHECK(fa.id() != fc.id());

    FeatureSet s1 = features::extract_features(fa, imgs);
    FeatureSet s2 = features::extract_features(fb, imgs);
    CHECK(max_abs_diff(s1.features, s2.features) == 0.0);
    CHECK(s1.extractor_id == fa.id());

    // identical sets score zero regardless of the extractor behind the features
    CHECK(frechet_distance(s1, s2) < 1e-8);
    FeatureSet s3 = features::extract_features(fc, imgs);
    CHECK(s3.extractor_id != s1.extractor_id);

    // save / load round trip
    fa.save("/tmp/lpmrf_test_extractor.ckpt");
    FeatureExtractor<float> loaded = FeatureExtractor<float>::load("/tmp/lpmrf_test_extractor.ckpt");
    FeatureSet s4 = features::extract_features(loaded, imgs);
    CHECK(max_abs_diff(s4.features, s1.features) == 0.0);
    std::remove("/tmp/lpmrf_test_extractor.ckpt");
}
