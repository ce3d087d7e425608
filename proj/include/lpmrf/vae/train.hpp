// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "lpmrf/features/extractor.hpp"
#include "lpmrf/nn/adam.hpp"
#include "lpmrf/vae/vae.hpp"

namespace lpmrf::vae {

struct VaeLossParts {
    double total = 0.0;
    double recon_l1 = 0.0;
    double perceptual = 0.0;
    double kl = 0.0;
};

// L_recon (l1 + weighted feature-space l1) + kl_weight * KL. The perceptual
// term is pluggable and disabled when weight is zero or no extractor is given.
template <class T>
VaeLossParts vae_loss(const Tensor<T>& x, const Tensor<T>& x_hat,
                      const LatentDistribution<T>& dist, double perceptual_weight,
                      double kl_weight,
                      const features::FeatureExtractor<T>* extractor = nullptr) {
    LPMRF_REQUIRE(x.same_shape(x_hat), ShapeError, "vae_loss: shape mismatch");
    LPMRF_REQUIRE(perceptual_weight >= 0.0 && kl_weight >= 0.0, ParamError,
                  "vae_loss: negative weights");
    VaeLossParts parts;
    parts.recon_l1 = mean_abs_error(x, x_hat);
    if (extractor != nullptr && perceptual_weight > 0.0) {
        const auto fx = extractor->forward_maps(x, nullptr);
        const auto fh = extractor->forward_maps(x_hat, nullptr);
        parts.perceptual = features::perceptual_l1<T>(fh, fx);
    }
    parts.kl = kl_divergence(dist);
    parts.total = parts.recon_l1 + perceptual_weight * parts.perceptual + kl_weight * parts.kl;
    return parts;
}

struct TrainRow {
    int step = 0;
    double loss = 0.0;
    double recon_l1 = 0.0;
    double perceptual = 0.0;
    double kl = 0.0;
    double lr = 0.0;
};

struct VaeTrainConfig {
    int steps = 2000;
    int batch_size = 8;
    nn::LrSchedule schedule{1e-4, 1e-6, 1e-5, 500, 2000, true};
    uint64_t seed = 0;
    int log_every = 25;
};

// Trains in place; returns the per-log-step loss curve. Divergence (non-finite
// loss) aborts with a NumericError diagnostic.
template <class T>
std::vector<TrainRow> train_vae(SimVae<T>& vae, const std::vector<Tensor<T>>& images,
                                const VaeTrainConfig& cfg,
                                features::FeatureExtractor<T>* extractor = nullptr) {
    LPMRF_REQUIRE(!images.empty(), ParamError, "train_vae: empty dataset");
    const double w_p = vae.config().perceptual_weight;
    const double lambda = vae.config().kl_weight;

    std::vector<nn::NamedParam<T>> ps;
    vae.params(ps);
    nn::Adam<T> opt(ps, {0.9, 0.999, 1e-8, 0.0});
    Rng rng(cfg.seed, 0x7a11);

    const int h = images[0].dim(1), w = images[0].dim(2);
    std::vector<TrainRow> curve;

    for (int step = 0; step < cfg.steps; ++step) {
        Tensor<T> batch({cfg.batch_size, 3, h, w});
        for (int i = 0; i < cfg.batch_size; ++i) {
            const auto& img = images[size_t(rng.uniform_int(0, int64_t(images.size()) - 1))];
            std::copy(img.data(), img.data() + img.numel(),
                      batch.data() + int64_t(i) * img.numel());
        }

        nn::Cache<T> cache;
        const Tensor<T> raw = vae.encoder_raw(batch, &cache);
        const LatentDistribution<T> dist = vae.split_moments(raw);

        // reparameterized sample feeds the decoder during training
        Tensor<T> eps(dist.mean.shape());
        rng.fill_normal(eps.data(), eps.numel(), 0.0, 1.0);
        Tensor<T> z = dist.mean;
        for (int64_t i = 0; i < z.numel(); ++i)
            z[i] += T(std::exp(0.5 * double(dist.log_variance[i]))) * eps[i];

        const Tensor<T> x_hat = vae.decode(z, &cache);

        VaeLossParts parts;
        parts.recon_l1 = mean_abs_error(batch, x_hat);
        parts.kl = kl_divergence(dist);

        // d/d x_hat of the reconstruction terms
        Tensor<T> gxhat(x_hat.shape());
        const double l1_scale = 1.0 / double(x_hat.numel());
        for (int64_t i = 0; i < x_hat.numel(); ++i)
            gxhat[i] = T((x_hat[i] > batch[i] ? 1.0 : (x_hat[i] < batch[i] ? -1.0 : 0.0)) *
                         l1_scale);

        nn::Cache<T> fcache;
        if (extractor != nullptr && w_p > 0.0) {
            const auto fx = extractor->forward_maps(batch, nullptr);
            const auto fh = extractor->forward_maps(x_hat, &fcache);
            std::vector<Tensor<T>> fgrads;
            parts.perceptual = features::perceptual_l1<T>(fh, fx, &fgrads);
            Tensor<T> gperc = extractor->backward_maps(fgrads, fcache);
            gxhat.add_(gperc, T(w_p));
        }
        parts.total = parts.recon_l1 + w_p * parts.perceptual + lambda * parts.kl;
        LPMRF_REQUIRE(std::isfinite(parts.total), NumericError,
                      "vae training diverged (non-finite loss) at step ", step);

        opt.zero_grad();
        Tensor<T> gz = vae.decoder_backward(gxhat, cache);

        // reparameterization + analytic KL gradients
        const int nb = cfg.batch_size;
        Tensor<T> gmean = gz;
        Tensor<T> glogvar(gz.shape());
        for (int64_t i = 0; i < gz.numel(); ++i) {
            const double lv = double(dist.log_variance[i]);
            glogvar[i] = T(double(gz[i]) * double(eps[i]) * 0.5 * std::exp(0.5 * lv) +
                           lambda * 0.5 * (std::exp(lv) - 1.0) / nb);
            gmean[i] = T(double(gmean[i]) + lambda * double(dist.mean[i]) / nb);
        }
        vae.encoder_backward(vae.merge_moment_grads(gmean, glogvar), cache);

        const double lr = cfg.schedule.at(step);
        opt.step(lr);

        if (step % cfg.log_every == 0 || step + 1 == cfg.steps)
            curve.push_back({step, parts.total, parts.recon_l1, parts.perceptual, parts.kl, lr});
    }

    // corpus-level latent statistics for flow-endpoint standardization
    const int c = vae.config().latent_channels;
    Tensor<double> sum({c}), sum2({c});
    int64_t count = 0;
    const int chunk = 16;
    for (size_t start = 0; start < images.size(); start += chunk) {
        const int nb = int(std::min(size_t(chunk), images.size() - start));
        Tensor<T> batch({nb, 3, h, w});
        for (int i = 0; i < nb; ++i)
            std::copy(images[start + size_t(i)].data(),
                      images[start + size_t(i)].data() + images[start + size_t(i)].numel(),
                      batch.data() + int64_t(i) * images[start + size_t(i)].numel());
        const Tensor<T> z = vae.encode_mean(batch);
        const int64_t plane = int64_t(z.dim(2)) * z.dim(3);
        for (int ni = 0; ni < nb; ++ni)
            for (int cc = 0; cc < c; ++cc) {
                const T* p = z.data() + (int64_t(ni) * c + cc) * plane;
                for (int64_t i = 0; i < plane; ++i) {
                    sum[cc] += double(p[i]);
                    sum2[cc] += double(p[i]) * double(p[i]);
                }
            }
        count += int64_t(nb) * plane;
    }
    Tensor<T> lm({c}), ls({c});
    for (int cc = 0; cc < c; ++cc) {
        const double mean = sum[cc] / double(count);
        const double var = std::max(sum2[cc] / double(count) - mean * mean, 1e-12);
        lm[cc] = T(mean);
        ls[cc] = T(std::sqrt(var));
    }
    vae.set_latent_norm(lm, ls);
    return curve;
}

// Mean reconstruction PSNR of decode(encode_mean(x)) over an image set.
template <class T>
double reconstruction_psnr(const SimVae<T>& vae, const std::vector<Tensor<T>>& images) {
    LPMRF_REQUIRE(!images.empty(), ParamError, "reconstruction_psnr: empty set");
    double acc = 0.0;
    const int h = images[0].dim(1), w = images[0].dim(2);
    const int chunk = 16;
    for (size_t start = 0; start < images.size(); start += chunk) {
        const int nb = int(std::min(size_t(chunk), images.size() - start));
        Tensor<T> batch({nb, 3, h, w});
        for (int i = 0; i < nb; ++i)
            std::copy(images[start + size_t(i)].data(),
                      images[start + size_t(i)].data() + int64_t(3) * h * w,
                      batch.data() + int64_t(i) * 3 * h * w);
        const Tensor<T> recon = vae.decode(vae.encode_mean(batch));
        for (int i = 0; i < nb; ++i) {
            Image a({3, h, w}), b({3, h, w});
            for (int64_t q = 0; q < a.numel(); ++q) {
                a[q] = float(images[start + size_t(i)][q]);
                b[q] = float(recon[int64_t(i) * a.numel() + q]);
            }
            acc += metrics::psnr(a, b);
        }
    }
    return acc / double(images.size());
}

}  // namespace lpmrf::vae
