// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#include "lpmrf/pipeline/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <Eigen/Dense>

#include "lpmrf/io/png_io.hpp"
#include "lpmrf/metrics/metrics.hpp"

namespace lpmrf::pipeline {

namespace {

Tensor<float> stack_images(const std::vector<Image>& imgs, size_t start, int count) {
    const int h = imgs[start].dim(1), w = imgs[start].dim(2);
    Tensor<float> batch({count, 3, h, w});
    for (int i = 0; i < count; ++i) {
        const Image& img = imgs[start + size_t(i)];
        LPMRF_REQUIRE(img.dim(1) == h && img.dim(2) == w, ShapeError,
                      "stack_images: inconsistent sizes");
        std::copy(img.data(), img.data() + img.numel(), batch.data() + int64_t(i) * img.numel());
    }
    return batch;
}

Image slice_image(const Tensor<float>& batch, int i) {
    Image img({3, batch.dim(2), batch.dim(3)});
    std::copy(batch.data() + int64_t(i) * img.numel(),
              batch.data() + int64_t(i + 1) * img.numel(), img.data());
    return img;
}

}  // namespace

Space space_from_string(const std::string& s) {
    if (s == "latent") return Space::Latent;
    if (s == "pixel") return Space::Pixel;
    throw ValidationError("space must be \"latent\" or \"pixel\", got \"" + s + "\"");
}

Tensor<float> NormalizedVelocity::velocity(const Tensor<float>& z, const std::vector<float>& t,
                                           nn::Cache<float>* cache) const {
    const int n = z.dim(0), c = z.dim(1);
    const int64_t plane = int64_t(z.dim(2)) * z.dim(3);
    Tensor<float> zn = z;
    for (int ni = 0; ni < n; ++ni)
        for (int cc = 0; cc < c; ++cc) {
            float* p = zn.data() + (int64_t(ni) * c + cc) * plane;
            const float m = mean_[cc], s = std_[cc];
            for (int64_t i = 0; i < plane; ++i) p[i] = (p[i] - m) / s;
        }
    Tensor<float> v = net_.velocity(zn, t, cache);
    for (int ni = 0; ni < n; ++ni)
        for (int cc = 0; cc < c; ++cc) {
            float* p = v.data() + (int64_t(ni) * c + cc) * plane;
            const float s = std_[cc];
            for (int64_t i = 0; i < plane; ++i) p[i] *= s;
        }
    return v;
}

std::vector<Image> RestorationSystem::restore_batch(const std::vector<Image>& ys) const {
    validate();
    LPMRF_REQUIRE(!ys.empty(), ParamError, "restore: empty input");
    std::vector<Image> out;
    out.reserve(ys.size());
    const int chunk = 16;
    for (size_t start = 0; start < ys.size(); start += chunk) {
        const int count = int(std::min(size_t(chunk), ys.size() - start));
        const Tensor<float> y = stack_images(ys, start, count);
        const Tensor<float> x_hat = posterior_mean.forward(y, nullptr);
        Tensor<float> result;
        if (space == Space::Pixel) {
            result = flow::sample_euler<float>(velocity, x_hat, sampler_steps);
            result.clamp_(0.0f, 1.0f);
        } else {
            const Tensor<float> z0 = vae_model->encode_mean(x_hat);
            NormalizedVelocity wrapped(velocity, vae_model->latent_norm_mean(),
                                       vae_model->latent_norm_std());
            const Tensor<float> z1 = flow::sample_euler<float>(wrapped, z0, sampler_steps);
            result = vae_model->decode(z1);
        }
        for (int i = 0; i < count; ++i) out.push_back(slice_image(result, i));
    }
    return out;
}

Image RestorationSystem::restore(const Image& y) const { return restore_batch({y}).front(); }

Image RestorationSystem::zero_velocity_reference(const Image& y) const {
    validate();
    const Tensor<float> yb = stack_images({y}, 0, 1);
    const Tensor<float> x_hat = posterior_mean.forward(yb, nullptr);
    if (space == Space::Pixel) return slice_image(x_hat, 0);
    return slice_image(vae_model->decode(vae_model->encode_mean(x_hat)), 0);
}

RestorationSystem RestorationSystem::load_bundle(const std::string& manifest_path) {
    std::ifstream f(manifest_path);
    LPMRF_REQUIRE(f.good(), DependencyError, "bundle manifest not found: ", manifest_path);
    nlohmann::json j = nlohmann::json::parse(f);
    const auto base = std::filesystem::path(manifest_path).parent_path();
    auto resolve = [&](const std::string& p) {
        return std::filesystem::path(p).is_absolute() ? p : (base / p).string();
    };

    RestorationSystem sys;
    sys.space = space_from_string(j.at("space").get<std::string>());
    sys.sampler_steps = j.value("sampler_steps", 25);
    LPMRF_REQUIRE(j.contains("posterior_mean"), ValidationError,
                  "bundle missing \"posterior_mean\" stage");
    LPMRF_REQUIRE(j.contains("flow"), ValidationError, "bundle missing \"flow\" stage");
    sys.posterior_mean =
        pm::PmUNet<float>::load(resolve(j["posterior_mean"].get<std::string>()));
    sys.velocity = flow::ConvVelocityNet<float>::load(resolve(j["flow"].get<std::string>()));
    if (sys.space == Space::Latent) {
        LPMRF_REQUIRE(j.contains("vae"), ValidationError,
                      "bundle missing \"vae\" stage required for latent space");
        sys.vae_model = vae::SimVae<float>::load(resolve(j["vae"].get<std::string>()));
    }
    sys.validate();
    return sys;
}

void RestorationSystem::save_bundle(const std::string& dir, const std::string& name) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    nlohmann::json j;
    j["space"] = space_name(space);
    j["sampler_steps"] = sampler_steps;
    j["posterior_mean"] = name + ".pm.ckpt";
    j["flow"] = name + ".flow.ckpt";
    const_cast<pm::PmUNet<float>&>(posterior_mean)
        .save((fs::path(dir) / (name + ".pm.ckpt")).string());
    const_cast<flow::ConvVelocityNet<float>&>(velocity)
        .save((fs::path(dir) / (name + ".flow.ckpt")).string());
    if (vae_model) {
        j["vae"] = name + ".vae.ckpt";
        const_cast<vae::SimVae<float>&>(*vae_model)
            .save((fs::path(dir) / (name + ".vae.ckpt")).string());
    }
    std::ofstream f((fs::path(dir) / (name + ".bundle.json")).string());
    f << j.dump(2) << "\n";
}

// ---- option-gap analysis ----

namespace {

struct IdentityCodec : VectorCodec {
    std::vector<double> encode(const std::vector<double>& x) const override { return x; }
    std::vector<double> decode(const std::vector<double>& z) const override { return z; }
    std::string name() const override { return "identity"; }
};

struct LinearCodec : VectorCodec {
    Eigen::MatrixXd a, a_inv;
    LinearCodec(int dim, uint64_t seed) {
        Rng rng(seed, 0x11e);
        // well-conditioned random map: identity plus a small perturbation
        a = Eigen::MatrixXd::Identity(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a(i, j) += 0.35 * rng.normal();
        a_inv = a.inverse();
    }
    std::vector<double> encode(const std::vector<double>& x) const override {
        Eigen::VectorXd v = a * Eigen::Map<const Eigen::VectorXd>(x.data(), long(x.size()));
        return {v.data(), v.data() + v.size()};
    }
    std::vector<double> decode(const std::vector<double>& z) const override {
        Eigen::VectorXd v = a_inv * Eigen::Map<const Eigen::VectorXd>(z.data(), long(z.size()));
        return {v.data(), v.data() + v.size()};
    }
    std::string name() const override { return "linear"; }
};

struct CubicCodec : VectorCodec {
    std::vector<double> encode(const std::vector<double>& x) const override {
        std::vector<double> z = x;
        for (auto& v : z) v = v * v * v;
        return z;
    }
    std::vector<double> decode(const std::vector<double>& z) const override {
        std::vector<double> x = z;
        for (auto& v : x) v = std::cbrt(v);
        return x;
    }
    std::string name() const override { return "cubic"; }
};

}  // namespace

std::unique_ptr<VectorCodec> make_identity_codec() { return std::make_unique<IdentityCodec>(); }
std::unique_ptr<VectorCodec> make_linear_codec(int dim, uint64_t seed) {
    return std::make_unique<LinearCodec>(dim, seed);
}
std::unique_ptr<VectorCodec> make_cubic_codec() { return std::make_unique<CubicCodec>(); }

OptionGaps source_option_gap(const VectorCodec& codec,
                             const std::vector<PosteriorPoint>& posterior) {
    LPMRF_REQUIRE(!posterior.empty(), ParamError, "source_option_gap: empty posterior");
    const size_t dim = posterior[0].x.size();
    double wsum = 0.0;
    for (const auto& p : posterior) {
        LPMRF_REQUIRE(p.x.size() == dim, ShapeError, "source_option_gap: dim mismatch");
        LPMRF_REQUIRE(p.weight >= 0.0, ParamError, "source_option_gap: negative weight");
        wsum += p.weight;
    }
    LPMRF_REQUIRE(wsum > 0.0, ParamError, "source_option_gap: zero-mass posterior");

    // x_hat = E[X | y], and E[E(X) | y] by exact enumeration
    std::vector<double> x_hat(dim, 0.0), z_mean(dim, 0.0);
    for (const auto& p : posterior) {
        const std::vector<double> z = codec.encode(p.x);
        for (size_t i = 0; i < dim; ++i) {
            x_hat[i] += p.weight / wsum * p.x[i];
            z_mean[i] += p.weight / wsum * z[i];
        }
    }

    auto sq_err = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            acc += d * d;
        }
        return acc;
    };

    OptionGaps gaps;
    gaps.gap1 = sq_err(codec.decode(z_mean), x_hat);
    gaps.gap2 = sq_err(codec.decode(codec.encode(x_hat)), x_hat);
    return gaps;
}

double image_gap2(const vae::SimVae<float>& v, const Image& pm_estimate) {
    Tensor<float> batch({1, 3, pm_estimate.dim(1), pm_estimate.dim(2)});
    std::copy(pm_estimate.data(), pm_estimate.data() + pm_estimate.numel(), batch.data());
    const Tensor<float> recon = v.decode(v.encode_mean(batch));
    double acc = 0.0;
    for (int64_t i = 0; i < batch.numel(); ++i) {
        const double d = double(recon[i]) - double(batch[i]);
        acc += d * d;
    }
    return acc;
}

// ---- experiment drivers ----

std::vector<Image> degrade_set(const std::vector<Image>& hq,
                               const degradation::DegradationRanges& ranges, uint64_t seed) {
    std::vector<Image> out;
    out.reserve(hq.size());
    for (size_t i = 0; i < hq.size(); ++i) {
        Rng draw(hash_combine(seed, uint64_t(i)), 0xde);
        const auto params = ranges.sample(draw, hash_combine(seed, uint64_t(i) * 2 + 1));
        out.push_back(degradation::degrade(hq[i], params));
    }
    return out;
}

EndpointPairs prepare_endpoint_pairs(Space space, const vae::SimVae<float>* vae_model,
                                     const pm::PmUNet<float>& pm_model,
                                     const std::vector<Image>& hq,
                                     const degradation::DegradationRanges& ranges, uint64_t seed) {
    LPMRF_REQUIRE(!hq.empty(), ParamError, "prepare_endpoint_pairs: empty dataset");
    LPMRF_REQUIRE(space == Space::Pixel || vae_model != nullptr, ConfigError,
                  "latent pairs require a vae");
    const std::vector<Image> lq = degrade_set(hq, ranges, seed);

    EndpointPairs pairs;
    const int n = int(hq.size());
    const int chunk = 16;
    for (int start = 0; start < n; start += chunk) {
        const int count = std::min(chunk, n - start);
        const Tensor<float> y = stack_images(lq, size_t(start), count);
        const Tensor<float> x = stack_images(hq, size_t(start), count);
        const Tensor<float> x_hat = pm_model.forward(y, nullptr);

        Tensor<float> src, dst;
        if (space == Space::Pixel) {
            src = x_hat;
            dst = x;
        } else {
            src = vae_model->normalize_latent(vae_model->encode_mean(x_hat));
            dst = vae_model->normalize_latent(vae_model->encode_mean(x));
        }
        if (pairs.z0.empty()) {
            std::vector<int> shape = src.shape();
            shape[0] = n;
            pairs.z0 = Tensor<float>(shape);
            pairs.z1 = Tensor<float>(shape);
        }
        const int64_t per = src.numel() / count;
        std::copy(src.data(), src.data() + src.numel(), pairs.z0.data() + int64_t(start) * per);
        std::copy(dst.data(), dst.data() + dst.numel(), pairs.z1.data() + int64_t(start) * per);
    }
    return pairs;
}

SystemCurve train_system_with_curve(Space space, const vae::SimVae<float>* vae_model,
                                    const pm::PmUNet<float>& pm_model,
                                    flow::ConvVelocityNet<float>& velocity,
                                    const EndpointPairs& pairs,
                                    const std::vector<Image>& val_lq,
                                    const std::vector<Image>& val_hq,
                                    const features::FeatureExtractor<float>& extractor,
                                    const flow::FlowTrainConfig& fcfg, int val_every,
                                    int sampler_steps, const std::string& sample_grid_dir) {
    LPMRF_REQUIRE(val_every > 0, ParamError, "val_every must be > 0");
    if (!sample_grid_dir.empty()) std::filesystem::create_directories(sample_grid_dir);
    const metrics::FeatureSet ref_features = features::extract_features(extractor, val_hq);

    const int n = pairs.z0.dim(0);
    const int64_t per = pairs.z0.numel() / n;

    SystemCurve curve;
    double last_loss = 0.0;

    auto evaluate = [&](int step) {
        // restore the validation set with the current velocity model
        std::vector<Image> restored;
        restored.reserve(val_lq.size());
        const int chunk = 16;
        for (size_t start = 0; start < val_lq.size(); start += chunk) {
            const int count = int(std::min(size_t(chunk), val_lq.size() - start));
            const Tensor<float> y = stack_images(val_lq, start, count);
            const Tensor<float> x_hat = pm_model.forward(y, nullptr);
            Tensor<float> result;
            if (space == Space::Pixel) {
                result = flow::sample_euler<float>(velocity, x_hat, sampler_steps);
                result.clamp_(0.0f, 1.0f);
            } else {
                const Tensor<float> z0 = vae_model->encode_mean(x_hat);
                NormalizedVelocity wrapped(velocity, vae_model->latent_norm_mean(),
                                           vae_model->latent_norm_std());
                const Tensor<float> z1 = flow::sample_euler<float>(wrapped, z0, sampler_steps);
                result = vae_model->decode(z1);
            }
            for (int i = 0; i < count; ++i) restored.push_back(slice_image(result, i));
        }
        if (!sample_grid_dir.empty()) {
            std::vector<Image> tiles;
            const size_t count = std::min<size_t>(6, val_lq.size());
            for (size_t i = 0; i < count; ++i) {
                tiles.push_back(val_lq[i]);
                const Tensor<float> y1 = stack_images(val_lq, i, 1);
                tiles.push_back(slice_image(pm_model.forward(y1, nullptr), 0));
                tiles.push_back(restored[i]);
                tiles.push_back(val_hq[i]);
            }
            char name[64];
            std::snprintf(name, sizeof name, "samples_step%06d.png", step);
            io::write_png((std::filesystem::path(sample_grid_dir) / name).string(),
                          io::image_grid(tiles, 4));
        }
        const metrics::FeatureSet fs = features::extract_features(extractor, restored);
        FlowValRow row;
        row.step = step;
        row.loss = last_loss;
        row.fd = metrics::frechet_distance(fs, ref_features);
        row.mmd2 = metrics::mmd_rbf(fs, ref_features);
        double ps = 0.0;
        for (size_t i = 0; i < restored.size(); ++i) ps += metrics::psnr(restored[i], val_hq[i]);
        row.psnr = ps / double(restored.size());
        curve.rows.push_back(row);
    };

    auto source = [&](Rng& rng, int, Tensor<float>& z0, Tensor<float>& z1) {
        std::vector<int> shape = pairs.z0.shape();
        shape[0] = fcfg.batch_size;
        z0 = Tensor<float>(shape);
        z1 = Tensor<float>(shape);
        for (int i = 0; i < fcfg.batch_size; ++i) {
            const int64_t idx = rng.uniform_int(0, n - 1);
            std::copy(pairs.z0.data() + idx * per, pairs.z0.data() + (idx + 1) * per,
                      z0.data() + int64_t(i) * per);
            std::copy(pairs.z1.data() + idx * per, pairs.z1.data() + (idx + 1) * per,
                      z1.data() + int64_t(i) * per);
        }
    };

    // wrap train_flow to interleave validation and capture the running loss
    std::vector<flow::FlowTrainRow> rows = flow::train_flow<float>(
        velocity, source, fcfg, [&](int step) {
            if (step % val_every == 0 || step + 1 == fcfg.steps) {
                evaluate(step);
            }
        });
    // align logged losses onto the validation rows where steps coincide
    for (auto& vr : curve.rows)
        for (const auto& tr : rows)
            if (tr.step <= vr.step) vr.loss = tr.loss;

    return curve;
}

}  // namespace lpmrf::pipeline
