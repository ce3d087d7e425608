// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpmrf/core/serialize.hpp"
#include "lpmrf/degrade/degrade.hpp"
#include "lpmrf/nn/adam.hpp"
#include "lpmrf/nn/blocks.hpp"

namespace lpmrf::pm {

using nn::Cache;
using nn::NamedParam;

struct PmNetConfig {
    int in_channels = 3;
    int base_channels = 32;
    std::vector<int> channel_multipliers{1, 2, 4};
    int blocks_per_level = 1;

    int levels() const { return int(channel_multipliers.size()); }
    int level_channels(int i) const { return base_channels * channel_multipliers[size_t(i)]; }

    void validate() const {
        LPMRF_REQUIRE(levels() >= 1 && base_channels >= 1 && blocks_per_level >= 1, ConfigError,
                      "invalid posterior-mean net config");
    }

    nlohmann::json to_json() const {
        return {{"in_channels", in_channels},
                {"base_channels", base_channels},
                {"channel_multipliers", channel_multipliers},
                {"blocks_per_level", blocks_per_level}};
    }
    static PmNetConfig from_json(const nlohmann::json& j) {
        PmNetConfig c;
        static const char* known[] = {"in_channels", "base_channels", "channel_multipliers",
                                      "blocks_per_level"};
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool ok = false;
            for (const char* k : known) ok |= (it.key() == k);
            LPMRF_REQUIRE(ok, ValidationError, "unknown posterior_mean key: ", it.key());
        }
        c.in_channels = j.value("in_channels", c.in_channels);
        c.base_channels = j.value("base_channels", c.base_channels);
        if (j.contains("channel_multipliers"))
            c.channel_multipliers = j["channel_multipliers"].get<std::vector<int>>();
        c.blocks_per_level = j.value("blocks_per_level", c.blocks_per_level);
        c.validate();
        return c;
    }
};

// U-shaped regression net mapping a degraded image to the same-shape estimate
// in [0,1]. Pure MSE training makes the output a posterior-mean estimate.
template <class T>
class PmUNet {
public:
    PmUNet() = default;
    explicit PmUNet(PmNetConfig cfg, uint64_t init_seed = 1) : cfg_(std::move(cfg)) {
        cfg_.validate();
        const int L = cfg_.levels();
        conv_in_ = nn::Conv2d<T>(cfg_.in_channels, cfg_.level_channels(0), 3);
        for (int i = 0; i < L; ++i) {
            std::vector<nn::SimplifiedResBlock<T>> blocks;
            for (int b = 0; b < cfg_.blocks_per_level; ++b)
                blocks.emplace_back(cfg_.level_channels(i), nn::NormKind::PixelLayer);
            down_blocks_.push_back(std::move(blocks));
            if (i + 1 < L) downs_.emplace_back(cfg_.level_channels(i), cfg_.level_channels(i + 1));
        }
        mid_ = nn::SimplifiedResBlock<T>(cfg_.level_channels(L - 1), nn::NormKind::PixelLayer);
        for (int i = L - 1; i >= 1; --i) {
            ups_.emplace_back(cfg_.level_channels(i), cfg_.level_channels(i - 1));
            std::vector<nn::SimplifiedResBlock<T>> blocks;
            for (int b = 0; b < cfg_.blocks_per_level; ++b)
                blocks.emplace_back(cfg_.level_channels(i - 1), nn::NormKind::PixelLayer);
            up_blocks_.push_back(std::move(blocks));
        }
        out_norm_ = nn::Norm<T>(cfg_.level_channels(0), nn::NormKind::PixelLayer);
        out_conv_ = nn::Conv2d<T>(cfg_.level_channels(0), cfg_.in_channels, 3);

        Rng rng(init_seed, 0x9e7);
        conv_in_.init_params(rng);
        for (auto& blocks : down_blocks_)
            for (auto& b : blocks) b.init_params(rng);
        for (auto& d : downs_) d.init_params(rng);
        mid_.init_params(rng);
        for (auto& u : ups_) u.init_params(rng);
        for (auto& blocks : up_blocks_)
            for (auto& b : blocks) b.init_params(rng);
        out_conv_.init_params(rng);
    }

    const PmNetConfig& config() const { return cfg_; }

    Tensor<T> forward(const Tensor<T>& y, Cache<T>* cache) const {
        LPMRF_REQUIRE(y.rank() == 4 && y.dim(1) == cfg_.in_channels, ShapeError,
                      "posterior_mean: expected (N,", cfg_.in_channels, ",H,W), got ",
                      y.shape_str());
        const int L = cfg_.levels();
        if (L > 1)
            LPMRF_REQUIRE(y.dim(2) % (1 << (L - 1)) == 0 && y.dim(3) % (1 << (L - 1)) == 0,
                          ShapeError, "posterior_mean: dims not divisible by 2^(levels-1)");
        Tensor<T> h = conv_in_.forward(y, cache);
        std::vector<Tensor<T>> skips;
        for (int i = 0; i < L; ++i) {
            for (const auto& b : down_blocks_[size_t(i)]) h = b.forward(h, cache);
            if (i + 1 < L) {
                skips.push_back(h);
                h = downs_[size_t(i)].forward(h, cache);
            }
        }
        h = mid_.forward(h, cache);
        for (size_t u = 0; u < ups_.size(); ++u) {
            h = ups_[u].forward(h, cache);
            h.add_(skips[skips.size() - 1 - u]);
            for (const auto& b : up_blocks_[u]) h = b.forward(h, cache);
        }
        h = out_norm_.forward(h, cache);
        h = out_act_.forward(h, cache);
        h = out_conv_.forward(h, cache);
        return out_sig_.forward(h, cache);
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& cache) {
        const int L = cfg_.levels();
        Tensor<T> g = out_sig_.backward(gout, cache);
        g = out_conv_.backward(g, cache);
        g = out_act_.backward(g, cache);
        g = out_norm_.backward(g, cache);
        std::vector<Tensor<T>> gskips(size_t(L > 0 ? L - 1 : 0));
        for (int u = int(ups_.size()) - 1; u >= 0; --u) {
            for (int b = int(up_blocks_[size_t(u)].size()) - 1; b >= 0; --b)
                g = up_blocks_[size_t(u)][size_t(b)].backward(g, cache);
            gskips[size_t(L - 2 - u)] = g;
            g = ups_[size_t(u)].backward(g, cache);
        }
        g = mid_.backward(g, cache);
        for (int i = L - 1; i >= 0; --i) {
            if (i + 1 < L) {
                g = downs_[size_t(i)].backward(g, cache);
                g.add_(gskips[size_t(i)]);
            }
            for (int b = int(down_blocks_[size_t(i)].size()) - 1; b >= 0; --b)
                g = down_blocks_[size_t(i)][size_t(b)].backward(g, cache);
        }
        return conv_in_.backward(g, cache);
    }

    void params(std::vector<NamedParam<T>>& out) {
        conv_in_.params("pm.conv_in", out);
        for (size_t i = 0; i < down_blocks_.size(); ++i) {
            for (size_t b = 0; b < down_blocks_[i].size(); ++b)
                down_blocks_[i][b].params("pm.down" + std::to_string(i) + ".block" +
                                              std::to_string(b),
                                          out);
            if (i < downs_.size()) downs_[i].params("pm.down" + std::to_string(i) + ".resize", out);
        }
        mid_.params("pm.mid", out);
        for (size_t u = 0; u < ups_.size(); ++u) {
            ups_[u].params("pm.up" + std::to_string(u) + ".resize", out);
            for (size_t b = 0; b < up_blocks_[u].size(); ++b)
                up_blocks_[u][b].params("pm.up" + std::to_string(u) + ".block" + std::to_string(b),
                                        out);
        }
        out_norm_.params("pm.out_norm", out);
        out_conv_.params("pm.out_conv", out);
    }

    void save(const std::string& path, nlohmann::json extra_meta = {}) {
        Checkpoint ck;
        ck.meta["kind"] = "posterior_mean";
        ck.meta["config"] = cfg_.to_json();
        for (auto& [k, v] : extra_meta.items()) ck.meta[k] = v;
        std::vector<NamedParam<T>> ps;
        params(ps);
        store_params(ck, ps);
        ck.save(path);
    }

    static PmUNet load(const std::string& path) {
        Checkpoint ck = Checkpoint::load(path);
        LPMRF_REQUIRE(ck.meta.value("kind", "") == "posterior_mean", IoError, path,
                      " is not a posterior-mean checkpoint");
        PmUNet net(PmNetConfig::from_json(ck.meta["config"]));
        std::vector<NamedParam<T>> ps;
        net.params(ps);
        load_params(ck, ps);
        return net;
    }

private:
    PmNetConfig cfg_;
    nn::Conv2d<T> conv_in_;
    std::vector<std::vector<nn::SimplifiedResBlock<T>>> down_blocks_;
    std::vector<nn::ResizeDown<T>> downs_;
    nn::SimplifiedResBlock<T> mid_;
    std::vector<nn::ResizeUp<T>> ups_;
    std::vector<std::vector<nn::SimplifiedResBlock<T>>> up_blocks_;
    nn::Norm<T> out_norm_;
    nn::SiLU<T> out_act_;
    nn::Conv2d<T> out_conv_;
    nn::Sigmoid<T> out_sig_;
};

// Single-image convenience wrapper (deterministic).
inline Image predict_posterior_mean(const PmUNet<float>& model, const Image& y) {
    require_image(y, "predict_posterior_mean");
    Tensor<float> batch({1, 3, y.dim(1), y.dim(2)});
    std::copy(y.data(), y.data() + y.numel(), batch.data());
    Tensor<float> out = model.forward(batch, nullptr);
    Image img({3, y.dim(1), y.dim(2)});
    std::copy(out.data(), out.data() + img.numel(), img.data());
    return img;
}

struct PmTrainConfig {
    int steps = 2000;
    int batch_size = 8;
    nn::LrSchedule schedule = nn::LrSchedule::fixed(1e-3, 2000);
    uint64_t seed = 0;
    int log_every = 50;
};

struct PmTrainRow {
    int step = 0;
    double mse = 0.0;
    double lr = 0.0;
};

// MSE regression on pairs (degrade(x), x) with per-sample random degradation
// parameters drawn on the fly. A custom pair source can replace the default
// degradation sampler (used by the Bayes-oracle tests).
template <class T>
std::vector<PmTrainRow> train_posterior_mean(
    PmUNet<T>& model, const std::vector<Image>& hq,
    const degradation::DegradationRanges& ranges, const PmTrainConfig& cfg,
    const std::function<void(Rng&, Tensor<T>& y, Tensor<T>& x)>& custom_source = nullptr) {
    LPMRF_REQUIRE(custom_source || !hq.empty(), ParamError, "train_posterior_mean: empty dataset");
    std::vector<NamedParam<T>> ps;
    model.params(ps);
    nn::Adam<T> opt(ps, {0.9, 0.999, 1e-8, 0.0});
    Rng rng(cfg.seed, 0x90a);

    std::vector<PmTrainRow> rows;
    for (int step = 0; step < cfg.steps; ++step) {
        Tensor<T> x_batch, y_batch;
        if (custom_source) {
            custom_source(rng, y_batch, x_batch);
        } else {
            const int h = hq[0].dim(1), w = hq[0].dim(2);
            x_batch = Tensor<T>({cfg.batch_size, 3, h, w});
            y_batch = Tensor<T>({cfg.batch_size, 3, h, w});
            for (int i = 0; i < cfg.batch_size; ++i) {
                const Image& x = hq[size_t(rng.uniform_int(0, int64_t(hq.size()) - 1))];
                const uint64_t sample_seed =
                    hash_combine(cfg.seed, uint64_t(step) * 1000003ull + uint64_t(i));
                const auto params = ranges.sample(rng, sample_seed);
                const Image y = degradation::degrade(x, params);
                for (int64_t q = 0; q < x.numel(); ++q) {
                    x_batch[int64_t(i) * x.numel() + q] = T(x[q]);
                    y_batch[int64_t(i) * x.numel() + q] = T(y[q]);
                }
            }
        }

        Cache<T> cache;
        opt.zero_grad();
        const Tensor<T> pred = model.forward(y_batch, &cache);
        const double mse = mean_squared_error(pred, x_batch);
        LPMRF_REQUIRE(std::isfinite(mse), NumericError,
                      "posterior-mean training diverged at step ", step);
        Tensor<T> g(pred.shape());
        const double scale = 2.0 / double(pred.numel());
        for (int64_t i = 0; i < pred.numel(); ++i)
            g[i] = T((double(pred[i]) - double(x_batch[i])) * scale);
        model.backward(g, cache);
        opt.step(cfg.schedule.at(step));

        if (step % cfg.log_every == 0 || step + 1 == cfg.steps)
            rows.push_back({step, mse, cfg.schedule.at(step)});
    }
    return rows;
}

}  // namespace lpmrf::pm
