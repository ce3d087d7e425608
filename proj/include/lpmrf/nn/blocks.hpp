// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lpmrf/nn/layers.hpp"

namespace lpmrf::nn {

enum class NormKind { PixelLayer, Group };

// Dispatch between pixel-wise layer norm and the group-norm baseline.
template <class T>
class Norm {
public:
    Norm() = default;
    Norm(int channels, NormKind kind, int groups = 32) : kind_(kind) {
        if (kind_ == NormKind::PixelLayer)
            pixel_ = PixelwiseLayerNorm<T>(channels);
        else
            group_ = GroupNorm<T>(channels, groups);
    }

    Tensor<T> forward(const Tensor<T>& x, Cache<T>* c) const {
        return kind_ == NormKind::PixelLayer ? pixel_.forward(x, c) : group_.forward(x, c);
    }
    Tensor<T> backward(const Tensor<T>& g, Cache<T>& c) {
        return kind_ == NormKind::PixelLayer ? pixel_.backward(g, c) : group_.backward(g, c);
    }
    void params(const std::string& p, std::vector<NamedParam<T>>& out) {
        if (kind_ == NormKind::PixelLayer)
            pixel_.params(p, out);
        else
            group_.params(p, out);
    }

private:
    NormKind kind_ = NormKind::PixelLayer;
    PixelwiseLayerNorm<T> pixel_;
    GroupNorm<T> group_;
};

// One-norm / one-activation residual block: norm -> conv3x3 -> silu -> conv3x3 -> +x.
template <class T>
class SimplifiedResBlock {
public:
    SimplifiedResBlock() = default;
    SimplifiedResBlock(int channels, NormKind norm_kind)
        : ch_(channels),
          norm_(channels, norm_kind),
          conv1_(channels, channels, 3),
          conv2_(channels, channels, 3) {}

    void init_params(Rng& rng) {
        conv1_.init_params(rng);
        conv2_.init_params(rng);
    }

    Tensor<T> forward(const Tensor<T>& x, Cache<T>* c) const {
        LPMRF_REQUIRE(x.dim(1) == ch_, ConfigError, "resblock: channel mismatch ", x.dim(1),
                      " != ", ch_);
        Tensor<T> h = norm_.forward(x, c);
        h = conv1_.forward(h, c);
        h = act_.forward(h, c);
        h = conv2_.forward(h, c);
        h.add_(x);
        return h;
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& c) {
        Tensor<T> g = conv2_.backward(gout, c);
        g = act_.backward(g, c);
        g = conv1_.backward(g, c);
        g = norm_.backward(g, c);
        g.add_(gout);
        return g;
    }

    void params(const std::string& p, std::vector<NamedParam<T>>& out) {
        norm_.params(p + ".norm", out);
        conv1_.params(p + ".conv1", out);
        conv2_.params(p + ".conv2", out);
    }

    static OpAudit audit() { return {1, 1, 2}; }
    int64_t param_count() const { return conv1_.param_count() + conv2_.param_count() + 2 * ch_; }

private:
    int ch_ = 0;
    Norm<T> norm_;
    Conv2d<T> conv1_, conv2_;
    SiLU<T> act_;
};

// SD-VAE style block: norm -> silu -> conv -> norm -> silu -> conv, 1x1 skip on
// channel change. Kept as the ablation baseline.
template <class T>
class SdResBlock {
public:
    SdResBlock() = default;
    SdResBlock(int in_ch, int out_ch, NormKind norm_kind)
        : in_(in_ch), out_(out_ch),
          norm1_(in_ch, norm_kind), norm2_(out_ch, norm_kind),
          conv1_(in_ch, out_ch, 3), conv2_(out_ch, out_ch, 3) {
        if (in_ != out_) skip_ = Conv2d<T>(in_, out_, 1);
    }

    void init_params(Rng& rng) {
        conv1_.init_params(rng);
        conv2_.init_params(rng);
        if (in_ != out_) skip_.init_params(rng);
    }

    Tensor<T> forward(const Tensor<T>& x, Cache<T>* c) const {
        LPMRF_REQUIRE(x.dim(1) == in_, ConfigError, "sd_resblock: channel mismatch");
        Tensor<T> h = norm1_.forward(x, c);
        h = act1_.forward(h, c);
        h = conv1_.forward(h, c);
        h = norm2_.forward(h, c);
        h = act2_.forward(h, c);
        h = conv2_.forward(h, c);
        if (in_ != out_)
            h.add_(skip_.forward(x, c));
        else
            h.add_(x);
        return h;
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& c) {
        Tensor<T> g = conv2_.backward(gout, c);
        g = act2_.backward(g, c);
        g = norm2_.backward(g, c);
        g = conv1_.backward(g, c);
        g = act1_.backward(g, c);
        g = norm1_.backward(g, c);
        if (in_ != out_)
            g.add_(skip_.backward(gout, c));
        else
            g.add_(gout);
        return g;
    }

    void params(const std::string& p, std::vector<NamedParam<T>>& out) {
        norm1_.params(p + ".norm1", out);
        conv1_.params(p + ".conv1", out);
        norm2_.params(p + ".norm2", out);
        conv2_.params(p + ".conv2", out);
        if (in_ != out_) skip_.params(p + ".skip", out);
    }

    static OpAudit audit() { return {2, 2, 2}; }

private:
    int in_ = 0, out_ = 0;
    Norm<T> norm1_, norm2_;
    Conv2d<T> conv1_, conv2_, skip_;
    SiLU<T> act1_, act2_;
};

// Resizing layers. The redistributed variants change channel count inside the
// resize itself; the *Keep variants reproduce the SD-VAE arrangement where the
// resize preserves channels and a later block adjusts them.
template <class T>
class ResizeDown {
public:
    ResizeDown() = default;
    ResizeDown(int in_ch, int out_ch) : conv_(in_ch, out_ch, 3, 2) {}

    void init_params(Rng& rng) { conv_.init_params(rng); }

    Tensor<T> forward(const Tensor<T>& x, Cache<T>* c) const {
        LPMRF_REQUIRE(x.dim(2) % 2 == 0 && x.dim(3) % 2 == 0, ConfigError,
                      "resize_down: odd input dims ", x.shape_str());
        return conv_.forward(x, c);
    }
    Tensor<T> backward(const Tensor<T>& g, Cache<T>& c) { return conv_.backward(g, c); }
    void params(const std::string& p, std::vector<NamedParam<T>>& out) {
        conv_.params(p + ".conv", out);
    }

private:
    Conv2d<T> conv_;
};

template <class T>
class ResizeUp {
public:
    ResizeUp() = default;
    ResizeUp(int in_ch, int out_ch) : conv_(in_ch, out_ch, 3, 1) {}

    void init_params(Rng& rng) { conv_.init_params(rng); }

    Tensor<T> forward(const Tensor<T>& x, Cache<T>* c) const {
        return conv_.forward(up_.forward(x, c), c);
    }
    Tensor<T> backward(const Tensor<T>& g, Cache<T>& c) {
        return up_.backward(conv_.backward(g, c), c);
    }
    void params(const std::string& p, std::vector<NamedParam<T>>& out) {
        conv_.params(p + ".conv", out);
    }

private:
    NearestUpsample2x<T> up_;
    Conv2d<T> conv_;
};

// Single-head spatial self-attention with residual, as used in SD-VAE middles.
template <class T>
class AttentionBlock {
public:
    AttentionBlock() = default;
    AttentionBlock(int channels, NormKind norm_kind)
        : ch_(channels), norm_(channels, norm_kind),
          q_(channels, channels, 1), k_(channels, channels, 1),
          v_(channels, channels, 1), proj_(channels, channels, 1) {}

    void init_params(Rng& rng) {
        q_.init_params(rng);
        k_.init_params(rng);
        v_.init_params(rng);
        proj_.init_params(rng);
    }

    Tensor<T> forward(const Tensor<T>& x, Cache<T>* c) const {
        const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
        const int hw = h * w;
        Tensor<T> hn = norm_.forward(x, c);
        Tensor<T> q = q_.forward(hn, c), k = k_.forward(hn, c), v = v_.forward(hn, c);
        const double scale = 1.0 / std::sqrt(double(ch_));

        Tensor<T> attn({n, hw, hw});
        Tensor<T> o({n, ch_, h, w});
        for (int ni = 0; ni < n; ++ni) {
            const T* qp = q.data() + int64_t(ni) * ch_ * hw;
            const T* kp = k.data() + int64_t(ni) * ch_ * hw;
            const T* vp = v.data() + int64_t(ni) * ch_ * hw;
            T* ap = attn.data() + int64_t(ni) * hw * hw;
            for (int i = 0; i < hw; ++i) {
                double mx = -1e300;
                for (int j = 0; j < hw; ++j) {
                    double s = 0.0;
                    for (int cc = 0; cc < ch_; ++cc)
                        s += double(qp[int64_t(cc) * hw + i]) * double(kp[int64_t(cc) * hw + j]);
                    s *= scale;
                    ap[int64_t(i) * hw + j] = T(s);
                    mx = s > mx ? s : mx;
                }
                double z = 0.0;
                for (int j = 0; j < hw; ++j) {
                    const double e = std::exp(double(ap[int64_t(i) * hw + j]) - mx);
                    ap[int64_t(i) * hw + j] = T(e);
                    z += e;
                }
                for (int j = 0; j < hw; ++j) ap[int64_t(i) * hw + j] = T(double(ap[int64_t(i) * hw + j]) / z);
            }
            T* op = o.data() + int64_t(ni) * ch_ * hw;
            for (int cc = 0; cc < ch_; ++cc) {
                for (int i = 0; i < hw; ++i) {
                    double s = 0.0;
                    for (int j = 0; j < hw; ++j)
                        s += double(vp[int64_t(cc) * hw + j]) * double(ap[int64_t(i) * hw + j]);
                    op[int64_t(cc) * hw + i] = T(s);
                }
            }
        }
        if (c) c->at(this) = {q, k, v, attn};
        Tensor<T> y = proj_.forward(o, c);
        y.add_(x);
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& c) {
        Tensor<T> go = proj_.backward(gout, c);
        auto& saved = c.at(this);
        const Tensor<T>&q = saved.at(0), &k = saved.at(1), &v = saved.at(2), &attn = saved.at(3);
        const int n = go.dim(0), h = go.dim(2), w = go.dim(3);
        const int hw = h * w;
        const double scale = 1.0 / std::sqrt(double(ch_));

        Tensor<T> gq(q.shape()), gk(k.shape()), gv(v.shape());
        for (int ni = 0; ni < n; ++ni) {
            const T* gop = go.data() + int64_t(ni) * ch_ * hw;
            const T* qp = q.data() + int64_t(ni) * ch_ * hw;
            const T* kp = k.data() + int64_t(ni) * ch_ * hw;
            const T* vp = v.data() + int64_t(ni) * ch_ * hw;
            const T* ap = attn.data() + int64_t(ni) * hw * hw;
            T* gqp = gq.data() + int64_t(ni) * ch_ * hw;
            T* gkp = gk.data() + int64_t(ni) * ch_ * hw;
            T* gvp = gv.data() + int64_t(ni) * ch_ * hw;

            // dV = dO A ; dA = V^T dO
            std::vector<double> dA(size_t(hw) * hw, 0.0);
            for (int cc = 0; cc < ch_; ++cc) {
                for (int j = 0; j < hw; ++j) {
                    double s = 0.0;
                    for (int i = 0; i < hw; ++i)
                        s += double(gop[int64_t(cc) * hw + i]) * double(ap[int64_t(i) * hw + j]);
                    gvp[int64_t(cc) * hw + j] = T(s);
                }
            }
            for (int i = 0; i < hw; ++i)
                for (int j = 0; j < hw; ++j) {
                    double s = 0.0;
                    for (int cc = 0; cc < ch_; ++cc)
                        s += double(vp[int64_t(cc) * hw + j]) * double(gop[int64_t(cc) * hw + i]);
                    dA[size_t(i) * hw + j] = s;
                }
            // softmax backward row-wise, then dQ = K dS^T, dK = Q dS
            for (int i = 0; i < hw; ++i) {
                double dot = 0.0;
                for (int j = 0; j < hw; ++j)
                    dot += dA[size_t(i) * hw + j] * double(ap[int64_t(i) * hw + j]);
                for (int j = 0; j < hw; ++j) {
                    const double ds =
                        double(ap[int64_t(i) * hw + j]) * (dA[size_t(i) * hw + j] - dot) * scale;
                    dA[size_t(i) * hw + j] = ds;
                }
            }
            for (int cc = 0; cc < ch_; ++cc) {
                for (int i = 0; i < hw; ++i) {
                    double s = 0.0;
                    for (int j = 0; j < hw; ++j)
                        s += double(kp[int64_t(cc) * hw + j]) * dA[size_t(i) * hw + j];
                    gqp[int64_t(cc) * hw + i] = T(s);
                }
                for (int j = 0; j < hw; ++j) {
                    double s = 0.0;
                    for (int i = 0; i < hw; ++i)
                        s += double(qp[int64_t(cc) * hw + i]) * dA[size_t(i) * hw + j];
                    gkp[int64_t(cc) * hw + j] = T(s);
                }
            }
        }
        Tensor<T> gh = q_.backward(gq, c);
        gh.add_(k_.backward(gk, c));
        gh.add_(v_.backward(gv, c));
        Tensor<T> gx = norm_.backward(gh, c);
        gx.add_(gout);
        return gx;
    }

    void params(const std::string& p, std::vector<NamedParam<T>>& out) {
        norm_.params(p + ".norm", out);
        q_.params(p + ".q", out);
        k_.params(p + ".k", out);
        v_.params(p + ".v", out);
        proj_.params(p + ".proj", out);
    }

private:
    int ch_ = 0;
    Norm<T> norm_;
    Conv2d<T> q_, k_, v_, proj_;
};

// Sinusoidal features for scalar time in [0, 1].
template <class T>
Tensor<T> time_features(const std::vector<T>& t, int dim) {
    LPMRF_REQUIRE(dim % 2 == 0, ConfigError, "time embedding dim must be even, got ", dim);
    const int half = dim / 2;
    Tensor<T> out({int(t.size()), dim});
    for (size_t n = 0; n < t.size(); ++n) {
        for (int i = 0; i < half; ++i) {
            const double freq = std::exp(-std::log(10000.0) * double(i) / double(half));
            out.at(int(n), 2 * i) = T(std::sin(double(t[n]) * freq * 1000.0));
            out.at(int(n), 2 * i + 1) = T(std::cos(double(t[n]) * freq * 1000.0));
        }
    }
    return out;
}

// Residual block with per-channel time conditioning injected between the two
// convolutions: norm -> conv -> (+ time proj) -> silu -> conv -> +x.
template <class T>
class TimeResBlock {
public:
    TimeResBlock() = default;
    TimeResBlock(int channels, int temb_dim, NormKind norm_kind)
        : ch_(channels),
          norm_(channels, norm_kind),
          conv1_(channels, channels, 3),
          conv2_(channels, channels, 3),
          time_proj_(temb_dim, channels) {}

    void init_params(Rng& rng) {
        conv1_.init_params(rng);
        conv2_.init_params(rng);
        time_proj_.init_params(rng, 0.1);
    }

    Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& temb, Cache<T>* c) const {
        Tensor<T> h = norm_.forward(x, c);
        h = conv1_.forward(h, c);
        const Tensor<T> tb = time_proj_.forward(temb, c);
        const int n = h.dim(0), hh = h.dim(2), ww = h.dim(3);
        const int64_t plane = int64_t(hh) * ww;
        for (int ni = 0; ni < n; ++ni)
            for (int cc = 0; cc < ch_; ++cc) {
                const T b = tb.at(ni, cc);
                T* hp = h.data() + (int64_t(ni) * ch_ + cc) * plane;
                for (int64_t i = 0; i < plane; ++i) hp[i] += b;
            }
        h = act_.forward(h, c);
        h = conv2_.forward(h, c);
        h.add_(x);
        return h;
    }

    // Accumulates d/d temb into gtemb.
    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& c, Tensor<T>& gtemb) {
        Tensor<T> g = conv2_.backward(gout, c);
        g = act_.backward(g, c);
        const int n = g.dim(0), hh = g.dim(2), ww = g.dim(3);
        const int64_t plane = int64_t(hh) * ww;
        Tensor<T> gtb({n, ch_});
        for (int ni = 0; ni < n; ++ni)
            for (int cc = 0; cc < ch_; ++cc) {
                const T* gp = g.data() + (int64_t(ni) * ch_ + cc) * plane;
                double s = 0.0;
                for (int64_t i = 0; i < plane; ++i) s += double(gp[i]);
                gtb.at(ni, cc) = T(s);
            }
        gtemb.add_(time_proj_.backward(gtb, c));
        g = conv1_.backward(g, c);
        g = norm_.backward(g, c);
        g.add_(gout);
        return g;
    }

    void params(const std::string& p, std::vector<NamedParam<T>>& out) {
        norm_.params(p + ".norm", out);
        conv1_.params(p + ".conv1", out);
        conv2_.params(p + ".conv2", out);
        time_proj_.params(p + ".time_proj", out);
    }

private:
    int ch_ = 0;
    Norm<T> norm_;
    Conv2d<T> conv1_, conv2_;
    Linear<T> time_proj_;
    SiLU<T> act_;
};

}  // namespace lpmrf::nn
