// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpmrf/core/serialize.hpp"
#include "lpmrf/nn/adam.hpp"
#include "lpmrf/nn/blocks.hpp"

namespace lpmrf::flow {

using nn::Cache;
using nn::NamedParam;

// Linear interpolation z_t = (1-t) z0 + t z1 along the conditional path.
template <class T>
Tensor<T> interpolate(const Tensor<T>& z0, const Tensor<T>& z1, double t) {
    LPMRF_REQUIRE(z0.same_shape(z1), ShapeError, "interpolate: shape mismatch ", z0.shape_str(),
                  " vs ", z1.shape_str());
    LPMRF_REQUIRE(t >= 0.0 && t <= 1.0, ParamError, "interpolate: t must be in [0,1], got ", t);
    Tensor<T> out = z0;
    const T a = T(1.0 - t), b = T(t);
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = a * z0[i] + b * z1[i];
    return out;
}

// Batched variant with one t per leading-dimension sample.
template <class T>
Tensor<T> interpolate_batch(const Tensor<T>& z0, const Tensor<T>& z1, const std::vector<T>& t) {
    LPMRF_REQUIRE(z0.same_shape(z1), ShapeError, "interpolate: shape mismatch");
    LPMRF_REQUIRE(int(t.size()) == z0.dim(0), ShapeError, "interpolate: t count ", t.size(),
                  " != batch ", z0.dim(0));
    Tensor<T> out = z0;
    const int64_t per = z0.numel() / z0.dim(0);
    for (int n = 0; n < z0.dim(0); ++n) {
        LPMRF_REQUIRE(t[size_t(n)] >= T(0) && t[size_t(n)] <= T(1), ParamError,
                      "interpolate: t must be in [0,1], got ", double(t[size_t(n)]));
        const T a = T(1) - t[size_t(n)], b = t[size_t(n)];
        const int64_t off = int64_t(n) * per;
        for (int64_t i = 0; i < per; ++i) out[off + i] = a * z0[off + i] + b * z1[off + i];
    }
    return out;
}

// Constant conditional velocity z1 - z0 (time-independent).
template <class T>
Tensor<T> conditional_velocity(const Tensor<T>& z0, const Tensor<T>& z1) {
    LPMRF_REQUIRE(z0.same_shape(z1), ShapeError, "conditional_velocity: shape mismatch");
    Tensor<T> v = z1;
    v.add_(z0, T(-1));
    return v;
}

template <class T>
class VelocityModel {
public:
    virtual ~VelocityModel() = default;
    // One t entry per batch sample.
    virtual Tensor<T> velocity(const Tensor<T>& z, const std::vector<T>& t,
                               Cache<T>* cache) const = 0;
    virtual Tensor<T> backward(const Tensor<T>& gout, Cache<T>& cache) = 0;
    virtual void params(std::vector<NamedParam<T>>& out) = 0;
};

template <class T>
struct CfmBatch {
    Tensor<T> z0, z1;
    std::vector<T> t;
};

// Mean squared deviation of the model velocity from z1 - z0 at interpolated
// points, normalized per element.
template <class T>
double cfm_loss(const VelocityModel<T>& model, const CfmBatch<T>& batch) {
    const Tensor<T> zt = interpolate_batch(batch.z0, batch.z1, batch.t);
    const Tensor<T> v = model.velocity(zt, batch.t, nullptr);
    const Tensor<T> target = conditional_velocity(batch.z0, batch.z1);
    const double loss = mean_squared_error(v, target);
    LPMRF_REQUIRE(std::isfinite(loss), NumericError, "cfm_loss: non-finite loss");
    return loss;
}

// Same loss, but also backpropagates into the model parameters.
template <class T>
double cfm_loss_backward(VelocityModel<T>& model, const CfmBatch<T>& batch, Cache<T>& cache) {
    const Tensor<T> zt = interpolate_batch(batch.z0, batch.z1, batch.t);
    const Tensor<T> v = model.velocity(zt, batch.t, &cache);
    const Tensor<T> target = conditional_velocity(batch.z0, batch.z1);
    const double loss = mean_squared_error(v, target);
    LPMRF_REQUIRE(std::isfinite(loss), NumericError, "cfm_loss: non-finite loss");
    Tensor<T> g(v.shape());
    const double scale = 2.0 / double(v.numel());
    for (int64_t i = 0; i < v.numel(); ++i) g[i] = T((double(v[i]) - double(target[i])) * scale);
    model.backward(g, cache);
    return loss;
}

// Euler integration of dz/dt = v(z, t) on the uniform grid t_k = k / steps.
template <class T>
Tensor<T> sample_euler(const VelocityModel<T>& model, const Tensor<T>& z0, int steps = 25) {
    LPMRF_REQUIRE(steps >= 1, ParamError, "sample_euler: steps must be >= 1, got ", steps);
    Tensor<T> z = z0;
    const std::vector<T> t_row(size_t(z0.dim(0)), T(0));
    std::vector<T> t = t_row;
    const T dt = T(1.0 / double(steps));
    for (int k = 0; k < steps; ++k) {
        std::fill(t.begin(), t.end(), T(double(k) / double(steps)));
        const Tensor<T> v = model.velocity(z, t, nullptr);
        z.add_(v, dt);
    }
    return z;
}

struct VelocityNetConfig {
    int state_channels = 16;
    int base_channels = 32;
    std::vector<int> channel_multipliers{1, 2};
    int blocks_per_level = 1;
    int time_embed_dim = 32;

    int levels() const { return int(channel_multipliers.size()); }
    int level_channels(int i) const { return base_channels * channel_multipliers[size_t(i)]; }

    void validate() const {
        LPMRF_REQUIRE(levels() >= 1, ConfigError, "velocity net needs at least one level");
        LPMRF_REQUIRE(time_embed_dim % 2 == 0, ConfigError, "time_embed_dim must be even");
    }

    nlohmann::json to_json() const {
        return {{"state_channels", state_channels},
                {"base_channels", base_channels},
                {"channel_multipliers", channel_multipliers},
                {"blocks_per_level", blocks_per_level},
                {"time_embed_dim", time_embed_dim}};
    }
    static VelocityNetConfig from_json(const nlohmann::json& j) {
        VelocityNetConfig c;
        static const char* known[] = {"state_channels", "base_channels", "channel_multipliers",
                                      "blocks_per_level", "time_embed_dim"};
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool ok = false;
            for (const char* k : known) ok |= (it.key() == k);
            LPMRF_REQUIRE(ok, ValidationError, "unknown flow key: ", it.key());
        }
        c.state_channels = j.value("state_channels", c.state_channels);
        c.base_channels = j.value("base_channels", c.base_channels);
        if (j.contains("channel_multipliers"))
            c.channel_multipliers = j["channel_multipliers"].get<std::vector<int>>();
        c.blocks_per_level = j.value("blocks_per_level", c.blocks_per_level);
        c.time_embed_dim = j.value("time_embed_dim", c.time_embed_dim);
        c.validate();
        return c;
    }
};

// U-shaped conv velocity backbone with sinusoidal time conditioning injected
// into every residual block and a zero-initialized output head, so a fresh
// model is exactly the zero field.
template <class T>
class ConvVelocityNet : public VelocityModel<T> {
public:
    ConvVelocityNet() = default;
    explicit ConvVelocityNet(VelocityNetConfig cfg, uint64_t init_seed = 1) : cfg_(std::move(cfg)) {
        cfg_.validate();
        const int F = cfg_.time_embed_dim;
        const int L = cfg_.levels();
        time1_ = nn::Linear<T>(F, F);
        time2_ = nn::Linear<T>(F, F);
        conv_in_ = nn::Conv2d<T>(cfg_.state_channels, cfg_.level_channels(0), 3);
        for (int i = 0; i < L; ++i) {
            std::vector<nn::TimeResBlock<T>> blocks;
            for (int b = 0; b < cfg_.blocks_per_level; ++b)
                blocks.emplace_back(cfg_.level_channels(i), F, nn::NormKind::PixelLayer);
            down_blocks_.push_back(std::move(blocks));
            if (i + 1 < L) downs_.emplace_back(cfg_.level_channels(i), cfg_.level_channels(i + 1));
        }
        mid_ = nn::TimeResBlock<T>(cfg_.level_channels(L - 1), F, nn::NormKind::PixelLayer);
        for (int i = L - 1; i >= 1; --i) {
            ups_.emplace_back(cfg_.level_channels(i), cfg_.level_channels(i - 1));
            std::vector<nn::TimeResBlock<T>> blocks;
            for (int b = 0; b < cfg_.blocks_per_level; ++b)
                blocks.emplace_back(cfg_.level_channels(i - 1), F, nn::NormKind::PixelLayer);
            up_blocks_.push_back(std::move(blocks));
        }
        out_norm_ = nn::Norm<T>(cfg_.level_channels(0), nn::NormKind::PixelLayer);
        out_conv_ = nn::Conv2d<T>(cfg_.level_channels(0), cfg_.state_channels, 3);

        Rng rng(init_seed, 0xf10f);
        time1_.init_params(rng);
        time2_.init_params(rng);
        conv_in_.init_params(rng);
        for (auto& blocks : down_blocks_)
            for (auto& b : blocks) b.init_params(rng);
        for (auto& d : downs_) d.init_params(rng);
        mid_.init_params(rng);
        for (auto& u : ups_) u.init_params(rng);
        for (auto& blocks : up_blocks_)
            for (auto& b : blocks) b.init_params(rng);
        out_conv_.init_params(rng, 1.0, /*zero=*/true);
    }

    const VelocityNetConfig& config() const { return cfg_; }

    Tensor<T> velocity(const Tensor<T>& z, const std::vector<T>& t,
                       Cache<T>* cache) const override {
        LPMRF_REQUIRE(z.rank() == 4 && z.dim(1) == cfg_.state_channels, ShapeError,
                      "velocity: expected (N,", cfg_.state_channels, ",H,W), got ", z.shape_str());
        const int L = cfg_.levels();
        LPMRF_REQUIRE(z.dim(2) % (1 << (L - 1)) == 0 && z.dim(3) % (1 << (L - 1)) == 0, ShapeError,
                      "velocity: state dims ", z.shape_str(), " not divisible by 2^(levels-1)");
        Tensor<T> temb = time_embedding(t, cache);

        Tensor<T> h = conv_in_.forward(z, cache);
        std::vector<Tensor<T>> skips;
        for (int i = 0; i < L; ++i) {
            for (const auto& b : down_blocks_[size_t(i)]) h = b.forward(h, temb, cache);
            if (i + 1 < L) {
                skips.push_back(h);
                h = downs_[size_t(i)].forward(h, cache);
            }
        }
        h = mid_.forward(h, temb, cache);
        for (size_t u = 0; u < ups_.size(); ++u) {
            h = ups_[u].forward(h, cache);
            h.add_(skips[skips.size() - 1 - u]);
            for (const auto& b : up_blocks_[u]) h = b.forward(h, temb, cache);
        }
        h = out_norm_.forward(h, cache);
        h = out_act_.forward(h, cache);
        return out_conv_.forward(h, cache);
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& cache) override {
        const int L = cfg_.levels();
        Tensor<T> gtemb = Tensor<T>({gout.dim(0), cfg_.time_embed_dim});

        Tensor<T> g = out_conv_.backward(gout, cache);
        g = out_act_.backward(g, cache);
        g = out_norm_.backward(g, cache);

        std::vector<Tensor<T>> gskips(size_t(L - 1));
        for (int u = int(ups_.size()) - 1; u >= 0; --u) {
            for (int b = int(up_blocks_[size_t(u)].size()) - 1; b >= 0; --b)
                g = up_blocks_[size_t(u)][size_t(b)].backward(g, cache, gtemb);
            gskips[size_t(L - 2 - u)] = g;  // gradient into the skip connection
            g = ups_[size_t(u)].backward(g, cache);
        }
        g = mid_.backward(g, cache, gtemb);
        for (int i = L - 1; i >= 0; --i) {
            if (i + 1 < L) {
                g = downs_[size_t(i)].backward(g, cache);
                g.add_(gskips[size_t(i)]);
            }
            for (int b = int(down_blocks_[size_t(i)].size()) - 1; b >= 0; --b)
                g = down_blocks_[size_t(i)][size_t(b)].backward(g, cache, gtemb);
        }
        g = conv_in_.backward(g, cache);

        Tensor<T> gt = time2_.backward(gtemb, cache);
        gt = time_act_.backward(gt, cache);
        time1_.backward(gt, cache);  // gradient w.r.t. raw features is discarded
        return g;
    }

    void params(std::vector<NamedParam<T>>& out) override {
        time1_.params("flow.time1", out);
        time2_.params("flow.time2", out);
        conv_in_.params("flow.conv_in", out);
        for (size_t i = 0; i < down_blocks_.size(); ++i) {
            for (size_t b = 0; b < down_blocks_[i].size(); ++b)
                down_blocks_[i][b].params(
                    "flow.down" + std::to_string(i) + ".block" + std::to_string(b), out);
            if (i < downs_.size())
                downs_[i].params("flow.down" + std::to_string(i) + ".resize", out);
        }
        mid_.params("flow.mid", out);
        for (size_t u = 0; u < ups_.size(); ++u) {
            ups_[u].params("flow.up" + std::to_string(u) + ".resize", out);
            for (size_t b = 0; b < up_blocks_[u].size(); ++b)
                up_blocks_[u][b].params("flow.up" + std::to_string(u) + ".block" + std::to_string(b),
                                        out);
        }
        out_norm_.params("flow.out_norm", out);
        out_conv_.params("flow.out_conv", out);
    }

    void save(const std::string& path, nlohmann::json extra_meta = {}) {
        Checkpoint ck;
        ck.meta["kind"] = "velocity_model";
        ck.meta["backbone"] = "conv_unet";
        ck.meta["config"] = cfg_.to_json();
        for (auto& [k, v] : extra_meta.items()) ck.meta[k] = v;
        std::vector<NamedParam<T>> ps;
        params(ps);
        store_params(ck, ps);
        ck.save(path);
    }

    static ConvVelocityNet load(const std::string& path) {
        Checkpoint ck = Checkpoint::load(path);
        LPMRF_REQUIRE(ck.meta.value("kind", "") == "velocity_model" &&
                          ck.meta.value("backbone", "") == "conv_unet",
                      IoError, path, " is not a conv velocity checkpoint");
        ConvVelocityNet net(VelocityNetConfig::from_json(ck.meta["config"]));
        std::vector<NamedParam<T>> ps;
        net.params(ps);
        load_params(ck, ps);
        return net;
    }

private:
    Tensor<T> time_embedding(const std::vector<T>& t, Cache<T>* cache) const {
        Tensor<T> feats = nn::time_features(t, cfg_.time_embed_dim);
        Tensor<T> h = time1_.forward(feats, cache);
        h = time_act_.forward(h, cache);
        return time2_.forward(h, cache);
    }

    VelocityNetConfig cfg_;
    nn::Linear<T> time1_, time2_;
    nn::SiLU<T> time_act_;
    nn::Conv2d<T> conv_in_;
    std::vector<std::vector<nn::TimeResBlock<T>>> down_blocks_;
    std::vector<nn::ResizeDown<T>> downs_;
    nn::TimeResBlock<T> mid_;
    std::vector<nn::ResizeUp<T>> ups_;
    std::vector<std::vector<nn::TimeResBlock<T>>> up_blocks_;
    nn::Norm<T> out_norm_;
    nn::SiLU<T> out_act_;
    nn::Conv2d<T> out_conv_;
};

// MLP velocity field for flat vector states (the 2-D transport experiments).
// Every hidden layer receives the time features through its own projection.
template <class T>
class MlpVelocityNet : public VelocityModel<T> {
public:
    struct Config {
        int dim = 2;
        int hidden = 64;
        int layers = 3;
        int time_embed_dim = 16;
    };

    MlpVelocityNet() = default;
    explicit MlpVelocityNet(Config cfg, uint64_t init_seed = 1) : cfg_(cfg) {
        LPMRF_REQUIRE(cfg.layers >= 1 && cfg.layers <= 8, ConfigError,
                      "mlp velocity net needs 1..8 hidden layers");
        Rng rng(init_seed, 0xf10e);
        int prev = cfg.dim;
        for (int l = 0; l < cfg.layers; ++l) {
            input_proj_.emplace_back(prev, cfg.hidden);
            time_proj_.emplace_back(cfg.time_embed_dim, cfg.hidden);
            input_proj_.back().init_params(rng);
            time_proj_.back().init_params(rng, 0.5);
            prev = cfg.hidden;
        }
        out_ = nn::Linear<T>(prev, cfg.dim);
        out_.init_params(rng, 1.0, /*zero=*/true);
    }

    Tensor<T> velocity(const Tensor<T>& z, const std::vector<T>& t,
                       Cache<T>* cache) const override {
        LPMRF_REQUIRE(z.rank() == 2 && z.dim(1) == cfg_.dim, ShapeError,
                      "velocity: expected (N,", cfg_.dim, "), got ", z.shape_str());
        const Tensor<T> feats = nn::time_features(t, cfg_.time_embed_dim);
        Tensor<T> h = z;
        for (size_t l = 0; l < input_proj_.size(); ++l) {
            Tensor<T> a = input_proj_[l].forward(h, cache);
            a.add_(time_proj_[l].forward(feats, cache));
            h = acts_[l % acts_.size()].forward(a, cache);
        }
        return out_.forward(h, cache);
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& cache) override {
        Tensor<T> g = out_.backward(gout, cache);
        for (int l = int(input_proj_.size()) - 1; l >= 0; --l) {
            g = acts_[size_t(l) % acts_.size()].backward(g, cache);
            time_proj_[size_t(l)].backward(g, cache);  // time-feature grad discarded
            g = input_proj_[size_t(l)].backward(g, cache);
        }
        return g;
    }

    void params(std::vector<NamedParam<T>>& out) override {
        for (size_t l = 0; l < input_proj_.size(); ++l) {
            input_proj_[l].params("flow.mlp" + std::to_string(l) + ".input", out);
            time_proj_[l].params("flow.mlp" + std::to_string(l) + ".time", out);
        }
        out_.params("flow.out", out);
    }

private:
    Config cfg_;
    std::vector<nn::Linear<T>> input_proj_;
    std::vector<nn::Linear<T>> time_proj_;
    std::array<nn::SiLU<T>, 8> acts_;  // distinct cache slots per layer
    nn::Linear<T> out_;
};

struct FlowTrainConfig {
    int steps = 3000;
    int batch_size = 16;
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double clip_norm = 1.0;
    uint64_t seed = 0;
    int log_every = 50;
    int snapshot_every = 200;  // last-good restore granularity on divergence
};

struct FlowTrainRow {
    int step = 0;
    double loss = 0.0;
    double lr = 0.0;
    double grad_norm = 0.0;
};

// Draws (z0, z1) batches from `source`, optimizes the CFM objective with the
// cited Adam settings, and restores the last snapshot before throwing if the
// loss goes non-finite.
template <class T>
std::vector<FlowTrainRow> train_flow(
    VelocityModel<T>& model,
    const std::function<void(Rng&, int step, Tensor<T>& z0, Tensor<T>& z1)>& source,
    const FlowTrainConfig& cfg,
    const std::function<void(int step)>& on_validate = nullptr) {
    std::vector<NamedParam<T>> ps;
    model.params(ps);
    nn::Adam<T> opt(ps, {cfg.beta1, cfg.beta2, 1e-8, cfg.clip_norm});
    Rng rng(cfg.seed, 0xcf);

    std::vector<Tensor<T>> snapshot;
    auto take_snapshot = [&] {
        snapshot.clear();
        for (auto& np : ps) snapshot.push_back(np.param->value);
    };
    take_snapshot();

    std::vector<FlowTrainRow> rows;
    for (int step = 0; step < cfg.steps; ++step) {
        CfmBatch<T> batch;
        source(rng, step, batch.z0, batch.z1);
        batch.t.resize(size_t(batch.z0.dim(0)));
        for (auto& tv : batch.t) tv = T(rng.uniform());

        Cache<T> cache;
        opt.zero_grad();
        double loss = 0.0;
        try {
            loss = cfm_loss_backward(model, batch, cache);
        } catch (const NumericError&) {
            for (size_t p = 0; p < ps.size(); ++p) ps[p].param->value = snapshot[p];
            throw NumericError("flow training diverged at step " + std::to_string(step) +
                               "; parameters restored to last snapshot");
        }
        const double gnorm = opt.step(cfg.lr);

        if (step % cfg.log_every == 0 || step + 1 == cfg.steps)
            rows.push_back({step, loss, cfg.lr, gnorm});
        if (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0 && std::isfinite(loss))
            take_snapshot();
        if (on_validate) on_validate(step);
    }
    return rows;
}

}  // namespace lpmrf::flow
