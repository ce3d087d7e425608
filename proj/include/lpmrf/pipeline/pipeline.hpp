// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lpmrf/degrade/degrade.hpp"
#include "lpmrf/features/extractor.hpp"
#include "lpmrf/flow/flow.hpp"
#include "lpmrf/pm/pm.hpp"
#include "lpmrf/vae/vae.hpp"

namespace lpmrf::pipeline {

enum class Space { Latent, Pixel };

inline const char* space_name(Space s) { return s == Space::Latent ? "latent" : "pixel"; }
Space space_from_string(const std::string& s);

// The two-stage restoration system: posterior-mean estimate, then flow
// transport, in either pixel space or the VAE's latent space.
struct RestorationSystem {
    pm::PmUNet<float> posterior_mean;
    std::optional<vae::SimVae<float>> vae_model;
    flow::ConvVelocityNet<float> velocity;
    Space space = Space::Pixel;
    int sampler_steps = 25;

    void validate() const {
        LPMRF_REQUIRE(space == Space::Pixel || vae_model.has_value(), ConfigError,
                      "latent-space restoration requires a vae checkpoint");
        LPMRF_REQUIRE(sampler_steps >= 1, ParamError, "sampler_steps must be >= 1");
    }

    Image restore(const Image& y) const;
    std::vector<Image> restore_batch(const std::vector<Image>& ys) const;

    // First-stage output alone.
    Image posterior_only(const Image& y) const { return pm::predict_posterior_mean(posterior_mean, y); }

    // Zero-velocity reference: the VAE round-trip of the posterior mean in
    // latent mode, the posterior mean itself in pixel mode.
    Image zero_velocity_reference(const Image& y) const;

    // Bundle manifest referencing the stage checkpoints; see FORMATS.md.
    static RestorationSystem load_bundle(const std::string& manifest_path);
    void save_bundle(const std::string& dir, const std::string& name) const;
};

// Change-of-variables wrapper running a velocity net trained on standardized
// latents directly in raw latent space: v(z) = std * net((z - mean)/std, t).
// A zero net stays exactly the zero field, which keeps the zero-velocity
// distortion bound structural.
class NormalizedVelocity : public flow::VelocityModel<float> {
public:
    NormalizedVelocity(const flow::ConvVelocityNet<float>& net, Tensor<float> mean,
                       Tensor<float> stddev)
        : net_(net), mean_(std::move(mean)), std_(std::move(stddev)) {}

    Tensor<float> velocity(const Tensor<float>& z, const std::vector<float>& t,
                           nn::Cache<float>* cache) const override;
    Tensor<float> backward(const Tensor<float>&, nn::Cache<float>&) override {
        throw ConfigError("NormalizedVelocity is inference-only");
    }
    void params(std::vector<nn::NamedParam<float>>&) override {
        throw ConfigError("NormalizedVelocity is inference-only");
    }

private:
    const flow::ConvVelocityNet<float>& net_;
    Tensor<float> mean_, std_;
};

// ---- source-distribution analysis (two candidate source options) ----

// Toy autoencoder on flat vectors, exact enough to make both expectations in
// the analysis computable in closed form.
struct VectorCodec {
    virtual ~VectorCodec() = default;
    virtual std::vector<double> encode(const std::vector<double>& x) const = 0;
    virtual std::vector<double> decode(const std::vector<double>& z) const = 0;
    virtual std::string name() const = 0;
};

std::unique_ptr<VectorCodec> make_identity_codec();
std::unique_ptr<VectorCodec> make_linear_codec(int dim, uint64_t seed);  // D = E^{-1}
std::unique_ptr<VectorCodec> make_cubic_codec();  // encode x^3, decode cbrt

struct PosteriorPoint {
    std::vector<double> x;
    double weight;
};

struct OptionGaps {
    double gap1 = 0.0;  // || D(E[z|y]) - x_hat ||^2, posterior mean of latents
    double gap2 = 0.0;  // || D(E(x_hat)) - x_hat ||^2, latent of the posterior mean
};

// Enumerable-posterior evaluation of both candidate source distributions.
OptionGaps source_option_gap(const VectorCodec& codec,
                             const std::vector<PosteriorPoint>& posterior);

// gap2 on a trained image VAE: reconstruction error of the posterior mean.
double image_gap2(const vae::SimVae<float>& v, const Image& pm_estimate);

// ---- experiment drivers shared by the CLI and the acceptance suite ----

struct FlowValRow {
    int step = 0;
    double loss = 0.0;
    double fd = 0.0;
    double mmd2 = 0.0;
    double psnr = 0.0;
};

struct SystemCurve {
    std::vector<FlowValRow> rows;

    double final_fd() const { return rows.empty() ? 1e300 : rows.back().fd; }
    // First logged step whose Frechet distance is <= target (-1 if never).
    int first_step_reaching(double target_fd) const {
        for (const auto& r : rows)
            if (r.fd <= target_fd) return r.step;
        return -1;
    }
};

// Endpoint pairs (z0 = source, z1 = target) prepared once per run.
struct EndpointPairs {
    Tensor<float> z0;
    Tensor<float> z1;
};

// Degrades each HQ image with per-index deterministic parameters, runs the
// posterior-mean model, and encodes both sides for the requested space.
EndpointPairs prepare_endpoint_pairs(Space space, const vae::SimVae<float>* vae_model,
                                     const pm::PmUNet<float>& pm_model,
                                     const std::vector<Image>& hq,
                                     const degradation::DegradationRanges& ranges, uint64_t seed);

// Degraded inputs for a validation set with per-index deterministic params.
std::vector<Image> degrade_set(const std::vector<Image>& hq,
                               const degradation::DegradationRanges& ranges, uint64_t seed);

// Trains `velocity` on the pairs while periodically restoring `val_lq` and
// scoring Frechet / MMD against `val_hq` features plus mean PSNR.
SystemCurve train_system_with_curve(Space space, const vae::SimVae<float>* vae_model,
                                    const pm::PmUNet<float>& pm_model,
                                    flow::ConvVelocityNet<float>& velocity,
                                    const EndpointPairs& pairs,
                                    const std::vector<Image>& val_lq,
                                    const std::vector<Image>& val_hq,
                                    const features::FeatureExtractor<float>& extractor,
                                    const flow::FlowTrainConfig& fcfg, int val_every,
                                    int sampler_steps = 25,
                                    const std::string& sample_grid_dir = "");

}  // namespace lpmrf::pipeline
