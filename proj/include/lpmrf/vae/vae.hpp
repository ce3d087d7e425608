// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpmrf/core/serialize.hpp"
#include "lpmrf/nn/blocks.hpp"

namespace lpmrf::vae {

using nn::Cache;
using nn::NamedParam;
using nn::NormKind;

// Architecture switches double as the ablation axes: layer norm vs group norm,
// simplified vs SD-style blocks, channel-redistributing vs channel-keeping
// resize layers, optional middle attention.
struct SimVAEConfig {
    int in_channels = 3;
    int base_channels = 32;
    std::vector<int> channel_multipliers{1, 2, 4, 4};
    int blocks_per_stage = 2;
    int latent_channels = 32;
    int downsample_factor = 8;
    bool use_layer_norm = true;
    bool use_middle_attention = false;
    bool resize_channel_redistribution = true;
    bool simplified_blocks = true;
    int group_norm_groups = 32;
    double kl_weight = 1e-6;
    double perceptual_weight = 0.1;

    int stages() const { return int(channel_multipliers.size()); }
    int stage_channels(int s) const { return base_channels * channel_multipliers[size_t(s)]; }
    NormKind norm_kind() const { return use_layer_norm ? NormKind::PixelLayer : NormKind::Group; }

    void validate() const {
        LPMRF_REQUIRE(stages() >= 1, ConfigError, "need at least one stage");
        LPMRF_REQUIRE(downsample_factor == (1 << (stages() - 1)), ConfigError,
                      "downsample_factor ", downsample_factor, " must equal 2^(stages-1) = ",
                      1 << (stages() - 1));
        LPMRF_REQUIRE(latent_channels >= 1, ConfigError, "latent_channels must be >= 1");
        LPMRF_REQUIRE(base_channels >= 1 && blocks_per_stage >= 1, ConfigError,
                      "base_channels and blocks_per_stage must be >= 1");
        LPMRF_REQUIRE(resize_channel_redistribution || !simplified_blocks || stages() == 1,
                      ConfigError,
                      "channel-keeping resize layers require SD-style blocks to change channels");
        LPMRF_REQUIRE(kl_weight >= 0.0 && perceptual_weight >= 0.0, ParamError,
                      "loss weights must be non-negative");
    }

    nlohmann::json to_json() const {
        return {{"in_channels", in_channels},
                {"base_channels", base_channels},
                {"channel_multipliers", channel_multipliers},
                {"blocks_per_stage", blocks_per_stage},
                {"latent_channels", latent_channels},
                {"downsample_factor", downsample_factor},
                {"use_layer_norm", use_layer_norm},
                {"use_middle_attention", use_middle_attention},
                {"resize_channel_redistribution", resize_channel_redistribution},
                {"simplified_blocks", simplified_blocks},
                {"group_norm_groups", group_norm_groups},
                {"kl_weight", kl_weight},
                {"perceptual_weight", perceptual_weight}};
    }

    static SimVAEConfig from_json(const nlohmann::json& j) {
        SimVAEConfig c;
        static const char* known[] = {
            "in_channels", "base_channels", "channel_multipliers", "blocks_per_stage",
            "latent_channels", "downsample_factor", "use_layer_norm", "use_middle_attention",
            "resize_channel_redistribution", "simplified_blocks", "group_norm_groups",
            "kl_weight", "perceptual_weight"};
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool ok = false;
            for (const char* k : known) ok |= (it.key() == k);
            LPMRF_REQUIRE(ok, ValidationError, "unknown vae key: ", it.key());
        }
        c.in_channels = j.value("in_channels", c.in_channels);
        c.base_channels = j.value("base_channels", c.base_channels);
        if (j.contains("channel_multipliers"))
            c.channel_multipliers = j["channel_multipliers"].get<std::vector<int>>();
        c.blocks_per_stage = j.value("blocks_per_stage", c.blocks_per_stage);
        c.latent_channels = j.value("latent_channels", c.latent_channels);
        c.downsample_factor = j.value("downsample_factor", 1 << (c.stages() - 1));
        c.use_layer_norm = j.value("use_layer_norm", c.use_layer_norm);
        c.use_middle_attention = j.value("use_middle_attention", c.use_middle_attention);
        c.resize_channel_redistribution =
            j.value("resize_channel_redistribution", c.resize_channel_redistribution);
        c.simplified_blocks = j.value("simplified_blocks", c.simplified_blocks);
        c.group_norm_groups = j.value("group_norm_groups", c.group_norm_groups);
        c.kl_weight = j.value("kl_weight", c.kl_weight);
        c.perceptual_weight = j.value("perceptual_weight", c.perceptual_weight);
        c.validate();
        return c;
    }
};

template <class T>
struct LatentDistribution {
    Tensor<T> mean;
    Tensor<T> log_variance;
};

// Diagonal-Gaussian KL to the unit normal, summed over latent elements and
// averaged over the batch.
template <class T>
double kl_divergence(const LatentDistribution<T>& dist) {
    LPMRF_REQUIRE(dist.mean.same_shape(dist.log_variance), ShapeError,
                  "kl_divergence: mean/log_variance shape mismatch");
    LPMRF_REQUIRE(dist.mean.all_finite() && dist.log_variance.all_finite(), NumericError,
                  "kl_divergence: non-finite input");
    const int n = dist.mean.rank() == 4 ? dist.mean.dim(0) : 1;
    double acc = 0.0;
    for (int64_t i = 0; i < dist.mean.numel(); ++i) {
        const double mu = double(dist.mean[i]);
        const double lv = double(dist.log_variance[i]);
        acc += 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
    }
    return acc / double(n);
}

// Channel-preserving block in either style; SD-style additionally supports a
// channel change (used when resize layers keep channels).
template <class T>
class VaeBlock {
public:
    VaeBlock() = default;
    VaeBlock(int in_ch, int out_ch, const SimVAEConfig& cfg) : simplified_(cfg.simplified_blocks) {
        if (simplified_) {
            LPMRF_REQUIRE(in_ch == out_ch, ConfigError,
                          "simplified blocks are channel-preserving (", in_ch, " -> ", out_ch, ")");
            sim_ = nn::SimplifiedResBlock<T>(in_ch, cfg.norm_kind());
        } else {
            sd_ = nn::SdResBlock<T>(in_ch, out_ch, cfg.norm_kind());
        }
    }

    void init_params(Rng& rng) { simplified_ ? sim_.init_params(rng) : sd_.init_params(rng); }
    Tensor<T> forward(const Tensor<T>& x, Cache<T>* c) const {
        return simplified_ ? sim_.forward(x, c) : sd_.forward(x, c);
    }
    Tensor<T> backward(const Tensor<T>& g, Cache<T>& c) {
        return simplified_ ? sim_.backward(g, c) : sd_.backward(g, c);
    }
    void params(const std::string& p, std::vector<NamedParam<T>>& out) {
        simplified_ ? sim_.params(p, out) : sd_.params(p, out);
    }
    nn::OpAudit audit() const {
        return simplified_ ? nn::SimplifiedResBlock<T>::audit() : nn::SdResBlock<T>::audit();
    }

private:
    bool simplified_ = true;
    nn::SimplifiedResBlock<T> sim_;
    nn::SdResBlock<T> sd_;
};

template <class T>
class Encoder {
public:
    Encoder() = default;
    explicit Encoder(const SimVAEConfig& cfg) : cfg_(cfg) {
        const int s = cfg.stages();
        conv_in_ = nn::Conv2d<T>(cfg.in_channels, cfg.stage_channels(0), 3);
        for (int i = 0; i < s; ++i) {
            std::vector<VaeBlock<T>> stage;
            for (int b = 0; b < cfg.blocks_per_stage; ++b) {
                int in_ch = cfg.stage_channels(i);
                if (!cfg.resize_channel_redistribution && i > 0 && b == 0)
                    in_ch = cfg.stage_channels(i - 1);
                stage.emplace_back(in_ch, cfg.stage_channels(i), cfg);
            }
            stages_.push_back(std::move(stage));
            if (i + 1 < s) {
                const int out_ch = cfg.resize_channel_redistribution ? cfg.stage_channels(i + 1)
                                                                     : cfg.stage_channels(i);
                downs_.emplace_back(cfg.stage_channels(i), out_ch);
            }
        }
        const int top = cfg.stage_channels(s - 1);
        mid1_ = VaeBlock<T>(top, top, cfg);
        mid2_ = VaeBlock<T>(top, top, cfg);
        if (cfg.use_middle_attention) mid_attn_ = nn::AttentionBlock<T>(top, cfg.norm_kind());
        out_norm_ = nn::Norm<T>(top, cfg.norm_kind(), cfg.group_norm_groups);
        out_conv_ = nn::Conv2d<T>(top, 2 * cfg.latent_channels, 3);
    }

    void init_params(Rng& rng) {
        conv_in_.init_params(rng);
        for (auto& st : stages_)
            for (auto& b : st) b.init_params(rng);
        for (auto& d : downs_) d.init_params(rng);
        mid1_.init_params(rng);
        mid2_.init_params(rng);
        if (cfg_.use_middle_attention) mid_attn_.init_params(rng);
        out_conv_.init_params(rng);
        // start the posterior tight: bias the log-variance half down so early
        // reconstruction is not drowned by unit-scale reparameterization noise
        std::vector<NamedParam<T>> ps;
        out_conv_.params("out", ps);
        for (auto& np : ps)
            if (np.name == "out.bias")
                for (int c = cfg_.latent_channels; c < 2 * cfg_.latent_channels; ++c)
                    np.param->value[c] = T(-6);
    }

    // Raw (N, 2c, H/f, W/f) moment tensor; callers split into mean/logvar.
    Tensor<T> forward(const Tensor<T>& x, Cache<T>* c) const {
        LPMRF_REQUIRE(x.rank() == 4 && x.dim(1) == cfg_.in_channels, ShapeError,
                      "encode: expected (N,", cfg_.in_channels, ",H,W), got ", x.shape_str());
        const int f = cfg_.downsample_factor;
        LPMRF_REQUIRE(x.dim(2) % f == 0 && x.dim(3) % f == 0, ShapeError,
                      "encode: dims ", x.shape_str(), " not divisible by f=", f);
        Tensor<T> h = conv_in_.forward(x, c);
        for (size_t i = 0; i < stages_.size(); ++i) {
            for (const auto& b : stages_[i]) h = b.forward(h, c);
            if (i < downs_.size()) h = downs_[i].forward(h, c);
        }
        h = mid1_.forward(h, c);
        if (cfg_.use_middle_attention) h = mid_attn_.forward(h, c);
        h = mid2_.forward(h, c);
        h = out_norm_.forward(h, c);
        h = out_act_.forward(h, c);
        return out_conv_.forward(h, c);
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& c) {
        Tensor<T> g = out_conv_.backward(gout, c);
        g = out_act_.backward(g, c);
        g = out_norm_.backward(g, c);
        g = mid2_.backward(g, c);
        if (cfg_.use_middle_attention) g = mid_attn_.backward(g, c);
        g = mid1_.backward(g, c);
        for (int i = int(stages_.size()) - 1; i >= 0; --i) {
            if (size_t(i) < downs_.size()) g = downs_[size_t(i)].backward(g, c);
            for (int b = int(stages_[size_t(i)].size()) - 1; b >= 0; --b)
                g = stages_[size_t(i)][size_t(b)].backward(g, c);
        }
        return conv_in_.backward(g, c);
    }

    void params(const std::string& p, std::vector<NamedParam<T>>& out) {
        conv_in_.params(p + ".conv_in", out);
        for (size_t i = 0; i < stages_.size(); ++i) {
            for (size_t b = 0; b < stages_[i].size(); ++b)
                stages_[i][b].params(p + ".stage" + std::to_string(i) + ".block" +
                                         std::to_string(b),
                                     out);
            if (i < downs_.size()) downs_[i].params(p + ".down" + std::to_string(i), out);
        }
        mid1_.params(p + ".mid.block0", out);
        if (cfg_.use_middle_attention) mid_attn_.params(p + ".mid.attn", out);
        mid2_.params(p + ".mid.block1", out);
        out_norm_.params(p + ".out_norm", out);
        out_conv_.params(p + ".out_conv", out);
    }

    nn::OpAudit block_audit() const { return mid1_.audit(); }

private:
    SimVAEConfig cfg_;
    nn::Conv2d<T> conv_in_;
    std::vector<std::vector<VaeBlock<T>>> stages_;
    std::vector<nn::ResizeDown<T>> downs_;
    VaeBlock<T> mid1_, mid2_;
    nn::AttentionBlock<T> mid_attn_;
    nn::Norm<T> out_norm_;
    nn::SiLU<T> out_act_;
    nn::Conv2d<T> out_conv_;
};

template <class T>
class Decoder {
public:
    Decoder() = default;
    explicit Decoder(const SimVAEConfig& cfg) : cfg_(cfg) {
        const int s = cfg.stages();
        const int top = cfg.stage_channels(s - 1);
        conv_in_ = nn::Conv2d<T>(cfg.latent_channels, top, 3);
        mid1_ = VaeBlock<T>(top, top, cfg);
        mid2_ = VaeBlock<T>(top, top, cfg);
        if (cfg.use_middle_attention) mid_attn_ = nn::AttentionBlock<T>(top, cfg.norm_kind());
        for (int i = s - 1; i >= 0; --i) {
            std::vector<VaeBlock<T>> stage;
            for (int b = 0; b < cfg.blocks_per_stage; ++b) {
                int in_ch = cfg.stage_channels(i);
                if (!cfg.resize_channel_redistribution && i + 1 < s && b == 0)
                    in_ch = cfg.stage_channels(i + 1);
                stage.emplace_back(in_ch, cfg.stage_channels(i), cfg);
            }
            stages_.push_back(std::move(stage));  // stored top-down
            if (i > 0) {
                const int out_ch = cfg.resize_channel_redistribution ? cfg.stage_channels(i - 1)
                                                                     : cfg.stage_channels(i);
                ups_.emplace_back(cfg.stage_channels(i), out_ch);
            }
        }
        out_norm_ = nn::Norm<T>(cfg.stage_channels(0), cfg.norm_kind(), cfg.group_norm_groups);
        out_conv_ = nn::Conv2d<T>(cfg.stage_channels(0), cfg.in_channels, 3);
    }

    void init_params(Rng& rng) {
        conv_in_.init_params(rng);
        mid1_.init_params(rng);
        mid2_.init_params(rng);
        if (cfg_.use_middle_attention) mid_attn_.init_params(rng);
        for (auto& st : stages_)
            for (auto& b : st) b.init_params(rng);
        for (auto& u : ups_) u.init_params(rng);
        out_conv_.init_params(rng);
    }

    Tensor<T> forward(const Tensor<T>& z, Cache<T>* c) const {
        LPMRF_REQUIRE(z.rank() == 4 && z.dim(1) == cfg_.latent_channels, ShapeError,
                      "decode: expected (N,", cfg_.latent_channels, ",h,w), got ", z.shape_str());
        Tensor<T> h = conv_in_.forward(z, c);
        h = mid1_.forward(h, c);
        if (cfg_.use_middle_attention) h = mid_attn_.forward(h, c);
        h = mid2_.forward(h, c);
        for (size_t i = 0; i < stages_.size(); ++i) {
            for (const auto& b : stages_[i]) h = b.forward(h, c);
            if (i < ups_.size()) h = ups_[i].forward(h, c);
        }
        h = out_norm_.forward(h, c);
        h = out_act_.forward(h, c);
        h = out_conv_.forward(h, c);
        return out_sig_.forward(h, c);
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& c) {
        Tensor<T> g = out_sig_.backward(gout, c);
        g = out_conv_.backward(g, c);
        g = out_act_.backward(g, c);
        g = out_norm_.backward(g, c);
        for (int i = int(stages_.size()) - 1; i >= 0; --i) {
            if (size_t(i) < ups_.size()) g = ups_[size_t(i)].backward(g, c);
            for (int b = int(stages_[size_t(i)].size()) - 1; b >= 0; --b)
                g = stages_[size_t(i)][size_t(b)].backward(g, c);
        }
        g = mid2_.backward(g, c);
        if (cfg_.use_middle_attention) g = mid_attn_.backward(g, c);
        g = mid1_.backward(g, c);
        return conv_in_.backward(g, c);
    }

    void params(const std::string& p, std::vector<NamedParam<T>>& out) {
        conv_in_.params(p + ".conv_in", out);
        mid1_.params(p + ".mid.block0", out);
        if (cfg_.use_middle_attention) mid_attn_.params(p + ".mid.attn", out);
        mid2_.params(p + ".mid.block1", out);
        for (size_t i = 0; i < stages_.size(); ++i) {
            for (size_t b = 0; b < stages_[i].size(); ++b)
                stages_[i][b].params(p + ".stage" + std::to_string(i) + ".block" +
                                         std::to_string(b),
                                     out);
            if (i < ups_.size()) ups_[i].params(p + ".up" + std::to_string(i), out);
        }
        out_norm_.params(p + ".out_norm", out);
        out_conv_.params(p + ".out_conv", out);
    }

private:
    SimVAEConfig cfg_;
    nn::Conv2d<T> conv_in_;
    VaeBlock<T> mid1_, mid2_;
    nn::AttentionBlock<T> mid_attn_;
    std::vector<std::vector<VaeBlock<T>>> stages_;
    std::vector<nn::ResizeUp<T>> ups_;
    nn::Norm<T> out_norm_;
    nn::SiLU<T> out_act_;
    nn::Conv2d<T> out_conv_;
    nn::Sigmoid<T> out_sig_;
};

template <class T>
class SimVae {
public:
    SimVae() = default;
    explicit SimVae(SimVAEConfig cfg, uint64_t init_seed = 1)
        : cfg_(std::move(cfg)), enc_(cfg_), dec_(cfg_) {
        cfg_.validate();
        Rng rng(init_seed, 0xae);
        enc_.init_params(rng);
        dec_.init_params(rng);
        latent_mean_ = Tensor<T>({cfg_.latent_channels});
        latent_std_ = Tensor<T>::full({cfg_.latent_channels}, T(1));
    }

    const SimVAEConfig& config() const { return cfg_; }

    LatentDistribution<T> encode(const Tensor<T>& x, Cache<T>* c = nullptr) const {
        return split_moments(enc_.forward(x, c));
    }

    // Deterministic latent (z = mean), the flow-endpoint convention.
    Tensor<T> encode_mean(const Tensor<T>& x) const { return encode(x).mean; }

    Tensor<T> decode(const Tensor<T>& z, Cache<T>* c = nullptr) const {
        return dec_.forward(z, c);
    }

    Tensor<T> encoder_raw(const Tensor<T>& x, Cache<T>* c) const { return enc_.forward(x, c); }
    Tensor<T> encoder_backward(const Tensor<T>& g, Cache<T>& c) { return enc_.backward(g, c); }
    Tensor<T> decoder_backward(const Tensor<T>& g, Cache<T>& c) { return dec_.backward(g, c); }

    LatentDistribution<T> split_moments(const Tensor<T>& raw) const {
        const int n = raw.dim(0), c2 = raw.dim(1), h = raw.dim(2), w = raw.dim(3);
        const int c = c2 / 2;
        LatentDistribution<T> d{Tensor<T>({n, c, h, w}), Tensor<T>({n, c, h, w})};
        const int64_t plane = int64_t(h) * w;
        for (int ni = 0; ni < n; ++ni)
            for (int cc = 0; cc < c; ++cc) {
                std::copy_n(raw.data() + ((int64_t(ni) * c2 + cc) * plane), plane,
                            d.mean.data() + ((int64_t(ni) * c + cc) * plane));
                std::copy_n(raw.data() + ((int64_t(ni) * c2 + c + cc) * plane), plane,
                            d.log_variance.data() + ((int64_t(ni) * c + cc) * plane));
            }
        return d;
    }

    Tensor<T> merge_moment_grads(const Tensor<T>& gmean, const Tensor<T>& glogvar) const {
        const int n = gmean.dim(0), c = gmean.dim(1), h = gmean.dim(2), w = gmean.dim(3);
        Tensor<T> g({n, 2 * c, h, w});
        const int64_t plane = int64_t(h) * w;
        for (int ni = 0; ni < n; ++ni)
            for (int cc = 0; cc < c; ++cc) {
                std::copy_n(gmean.data() + ((int64_t(ni) * c + cc) * plane), plane,
                            g.data() + ((int64_t(ni) * 2 * c + cc) * plane));
                std::copy_n(glogvar.data() + ((int64_t(ni) * c + cc) * plane), plane,
                            g.data() + ((int64_t(ni) * 2 * c + c + cc) * plane));
            }
        return g;
    }

    // Corpus-level per-channel standardization applied to flow endpoints.
    void set_latent_norm(const Tensor<T>& mean, const Tensor<T>& stddev) {
        latent_mean_ = mean;
        latent_std_ = stddev;
    }
    const Tensor<T>& latent_norm_mean() const { return latent_mean_; }
    const Tensor<T>& latent_norm_std() const { return latent_std_; }

    Tensor<T> normalize_latent(const Tensor<T>& z) const {
        Tensor<T> out = z;
        apply_norm(out, true);
        return out;
    }
    Tensor<T> denormalize_latent(const Tensor<T>& z) const {
        Tensor<T> out = z;
        apply_norm(out, false);
        return out;
    }

    void params(std::vector<NamedParam<T>>& out) {
        enc_.params("enc", out);
        dec_.params("dec", out);
    }

    nn::OpAudit block_audit() const { return enc_.block_audit(); }

    void save(const std::string& path, nlohmann::json extra_meta = {}) {
        Checkpoint ck;
        ck.meta["kind"] = "vae";
        ck.meta["config"] = cfg_.to_json();
        for (auto& [k, v] : extra_meta.items()) ck.meta[k] = v;
        std::vector<NamedParam<T>> ps;
        params(ps);
        store_params(ck, ps);
        ck.tensors["latent_norm.mean"] = latent_mean_.template cast<float>();
        ck.tensors["latent_norm.std"] = latent_std_.template cast<float>();
        ck.save(path);
    }

    static SimVae load(const std::string& path) {
        Checkpoint ck = Checkpoint::load(path);
        LPMRF_REQUIRE(ck.meta.value("kind", "") == "vae", IoError, path,
                      " is not a vae checkpoint");
        SimVae v(SimVAEConfig::from_json(ck.meta["config"]));
        std::vector<NamedParam<T>> ps;
        v.params(ps);
        load_params(ck, ps);
        v.latent_mean_ = ck.tensors.at("latent_norm.mean").template cast<T>();
        v.latent_std_ = ck.tensors.at("latent_norm.std").template cast<T>();
        return v;
    }

private:
    void apply_norm(Tensor<T>& z, bool forward) const {
        const int n = z.dim(0), c = z.dim(1);
        const int64_t plane = int64_t(z.dim(2)) * z.dim(3);
        for (int ni = 0; ni < n; ++ni)
            for (int cc = 0; cc < c; ++cc) {
                T* p = z.data() + (int64_t(ni) * c + cc) * plane;
                const T m = latent_mean_[cc], s = latent_std_[cc];
                if (forward)
                    for (int64_t i = 0; i < plane; ++i) p[i] = (p[i] - m) / s;
                else
                    for (int64_t i = 0; i < plane; ++i) p[i] = p[i] * s + m;
            }
    }

    SimVAEConfig cfg_;
    Encoder<T> enc_;
    Decoder<T> dec_;
    Tensor<T> latent_mean_, latent_std_;
};

// FLOP/parameter audit of one stage transition under the two resize designs.
struct ResizeAudit {
    int64_t params = 0;
    int64_t macs = 0;            // at the post-resize resolution
    int64_t bottleneck_volume = 0;  // elements right after the resize layer
};

struct ResizeComparison {
    ResizeAudit redistributed;
    ResizeAudit baseline;
};

inline ResizeComparison resize_transition_audit(int c_in, int c_out, int h, int w) {
    const int64_t oh = h / 2, ow = w / 2;
    ResizeComparison cmp;
    // resize conv changes channels in place
    cmp.redistributed.params = 9LL * c_in * c_out + c_out;
    cmp.redistributed.macs = 9LL * c_in * c_out * oh * ow;
    cmp.redistributed.bottleneck_volume = int64_t(c_out) * oh * ow;
    // channel-keeping resize followed by the channel change in the next block
    cmp.baseline.params = 9LL * c_in * c_in + c_in          // stride-2 conv (keep)
                          + 9LL * c_in * c_out + c_out      // block conv adjusting channels
                          + 1LL * c_in * c_out + c_out;     // 1x1 skip
    cmp.baseline.macs = (9LL * c_in * c_in + 9LL * c_in * c_out + 1LL * c_in * c_out) * oh * ow;
    cmp.baseline.bottleneck_volume = int64_t(c_in) * oh * ow;
    return cmp;
}

}  // namespace lpmrf::vae
