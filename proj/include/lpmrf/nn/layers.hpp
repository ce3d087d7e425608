// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lpmrf/core/rng.hpp"
#include "lpmrf/core/tensor.hpp"
#include "lpmrf/nn/module.hpp"

#if defined(_OPENMP)
#include <omp.h>
#define LPMRF_PRAGMA(x) _Pragma(#x)
#define LPMRF_OMP_FOR(cond) LPMRF_PRAGMA(omp parallel for schedule(static) if (cond))
#define LPMRF_SIMD_REDUCE(var) LPMRF_PRAGMA(omp simd reduction(+ : var))
#define LPMRF_SIMD LPMRF_PRAGMA(omp simd)
#else
#define LPMRF_OMP_FOR(cond)
#define LPMRF_SIMD_REDUCE(var)
#define LPMRF_SIMD
#endif

namespace lpmrf::nn {

// Kernels below parallelize only over disjoint output slices and keep a fixed
// per-element accumulation order, so results do not depend on thread count.

namespace detail {
// Valid output range [lo, hi] such that o*stride - pad + k stays inside [0, in).
inline void conv_bounds(int in, int out, int stride, int pad, int k, int& lo, int& hi) {
    const int a = pad - k;  // need o*stride >= a
    lo = a > 0 ? (a + stride - 1) / stride : 0;
    const int b = in - 1 + pad - k;  // need o*stride <= b
    hi = b < 0 ? -1 : b / stride;
    if (hi > out - 1) hi = out - 1;
}
}  // namespace detail

template <class T>
class Conv2d {
public:
    Conv2d() = default;

    Conv2d(int in_ch, int out_ch, int ksize, int stride = 1, int pad = -1)
        : in_ch_(in_ch), out_ch_(out_ch), k_(ksize), stride_(stride),
          pad_(pad < 0 ? ksize / 2 : pad) {
        weight_.init({out_ch_, in_ch_, k_, k_});
        bias_.init({out_ch_});
    }

    // He-normal init; flow heads use zero init so a fresh model is the zero field.
    void init_params(Rng& rng, double gain = 1.0, bool zero = false) {
        if (zero) {
            weight_.value.fill(T(0));
            bias_.value.fill(T(0));
            return;
        }
        const double stddev = gain * std::sqrt(2.0 / double(in_ch_ * k_ * k_));
        rng.fill_normal(weight_.value.data(), weight_.value.numel(), 0.0, stddev);
        bias_.value.fill(T(0));
    }

    Tensor<T> forward(const Tensor<T>& x, Cache<T>* cache) const {
        LPMRF_REQUIRE(x.rank() == 4 && x.dim(1) == in_ch_, ShapeError,
                      "conv2d: expected (N,", in_ch_, ",H,W), got ", x.shape_str());
        const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
        const int ho = (h + 2 * pad_ - k_) / stride_ + 1;
        const int wo = (w + 2 * pad_ - k_) / stride_ + 1;
        LPMRF_REQUIRE(ho > 0 && wo > 0, ShapeError, "conv2d: input ", x.shape_str(), " too small");
        Tensor<T> y({n, out_ch_, ho, wo});
        if (cache) cache->at(this) = {x};

        const int64_t in_plane = int64_t(h) * w, out_plane = int64_t(ho) * wo;
        const T* xp = x.data();
        const T* wp = weight_.value.data();
        T* yp = y.data();
        const int64_t jobs = int64_t(n) * out_ch_;
        LPMRF_OMP_FOR(jobs * out_plane * in_ch_ > 16384)
        for (int64_t job = 0; job < jobs; ++job) {
            const int ni = int(job / out_ch_), co = int(job % out_ch_);
            T* out = yp + (int64_t(ni) * out_ch_ + co) * out_plane;
            const T b = bias_.value[co];
            for (int64_t i = 0; i < out_plane; ++i) out[i] = b;
            for (int ci = 0; ci < in_ch_; ++ci) {
                const T* in = xp + (int64_t(ni) * in_ch_ + ci) * in_plane;
                const T* wk = wp + ((int64_t(co) * in_ch_ + ci) * k_) * k_;
                for (int kh = 0; kh < k_; ++kh) {
                    int ho_lo, ho_hi;
                    detail::conv_bounds(h, ho, stride_, pad_, kh, ho_lo, ho_hi);
                    for (int kw = 0; kw < k_; ++kw) {
                        const T wv = wk[kh * k_ + kw];
                        int wo_lo, wo_hi;
                        detail::conv_bounds(w, wo, stride_, pad_, kw, wo_lo, wo_hi);
                        for (int oh = ho_lo; oh <= ho_hi; ++oh) {
                            const T* __restrict__ irow =
                                in + int64_t(oh * stride_ - pad_ + kh) * w - pad_ + kw;
                            T* __restrict__ orow = out + int64_t(oh) * wo;
                            if (stride_ == 1) {
                                LPMRF_SIMD
                                for (int ow = wo_lo; ow <= wo_hi; ++ow) orow[ow] += wv * irow[ow];
                            } else {
                                for (int ow = wo_lo; ow <= wo_hi; ++ow)
                                    orow[ow] += wv * irow[int64_t(ow) * stride_];
                            }
                        }
                    }
                }
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& cache) {
        const Tensor<T>& x = cache.at(this).at(0);
        const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
        const int ho = gout.dim(2), wo = gout.dim(3);
        const int64_t in_plane = int64_t(h) * w, out_plane = int64_t(ho) * wo;
        const T* xp = x.data();
        const T* gp = gout.data();
        const T* wp = weight_.value.data();

        // d/d bias
        for (int co = 0; co < out_ch_; ++co) {
            T acc = T(0);
            for (int ni = 0; ni < n; ++ni) {
                const T* __restrict__ g = gp + (int64_t(ni) * out_ch_ + co) * out_plane;
                LPMRF_SIMD_REDUCE(acc)
                for (int64_t i = 0; i < out_plane; ++i) acc += g[i];
            }
            bias_.grad[co] += acc;
        }

        // d/d weight
        T* gw = weight_.grad.data();
        LPMRF_OMP_FOR(int64_t(out_ch_) * in_ch_ * out_plane * n > 16384)
        for (int co = 0; co < out_ch_; ++co) {
            for (int ci = 0; ci < in_ch_; ++ci) {
                for (int kh = 0; kh < k_; ++kh) {
                    int ho_lo, ho_hi;
                    detail::conv_bounds(h, ho, stride_, pad_, kh, ho_lo, ho_hi);
                    for (int kw = 0; kw < k_; ++kw) {
                        int wo_lo, wo_hi;
                        detail::conv_bounds(w, wo, stride_, pad_, kw, wo_lo, wo_hi);
                        T acc = T(0);
                        for (int ni = 0; ni < n; ++ni) {
                            const T* g = gp + (int64_t(ni) * out_ch_ + co) * out_plane;
                            const T* in = xp + (int64_t(ni) * in_ch_ + ci) * in_plane;
                            for (int oh = ho_lo; oh <= ho_hi; ++oh) {
                                const T* __restrict__ irow =
                                    in + int64_t(oh * stride_ - pad_ + kh) * w - pad_ + kw;
                                const T* __restrict__ grow = g + int64_t(oh) * wo;
                                if (stride_ == 1) {
                                    LPMRF_SIMD_REDUCE(acc)
                                    for (int ow = wo_lo; ow <= wo_hi; ++ow)
                                        acc += grow[ow] * irow[ow];
                                } else {
                                    for (int ow = wo_lo; ow <= wo_hi; ++ow)
                                        acc += grow[ow] * irow[int64_t(ow) * stride_];
                                }
                            }
                        }
                        gw[((int64_t(co) * in_ch_ + ci) * k_ + kh) * k_ + kw] += acc;
                    }
                }
            }
        }

        // d/d input (scatter from output positions; each thread owns one input plane)
        Tensor<T> gin({n, in_ch_, h, w});
        T* gip = gin.data();
        const int64_t jobs = int64_t(n) * in_ch_;
        LPMRF_OMP_FOR(jobs * out_plane * out_ch_ > 16384)
        for (int64_t job = 0; job < jobs; ++job) {
            const int ni = int(job / in_ch_), ci = int(job % in_ch_);
            T* gi = gip + (int64_t(ni) * in_ch_ + ci) * in_plane;
            for (int co = 0; co < out_ch_; ++co) {
                const T* g = gp + (int64_t(ni) * out_ch_ + co) * out_plane;
                const T* wk = wp + ((int64_t(co) * in_ch_ + ci) * k_) * k_;
                for (int kh = 0; kh < k_; ++kh) {
                    int ho_lo, ho_hi;
                    detail::conv_bounds(h, ho, stride_, pad_, kh, ho_lo, ho_hi);
                    for (int kw = 0; kw < k_; ++kw) {
                        const T wv = wk[kh * k_ + kw];
                        int wo_lo, wo_hi;
                        detail::conv_bounds(w, wo, stride_, pad_, kw, wo_lo, wo_hi);
                        for (int oh = ho_lo; oh <= ho_hi; ++oh) {
                            T* __restrict__ irow =
                                gi + int64_t(oh * stride_ - pad_ + kh) * w - pad_ + kw;
                            const T* __restrict__ grow = g + int64_t(oh) * wo;
                            if (stride_ == 1) {
                                LPMRF_SIMD
                                for (int ow = wo_lo; ow <= wo_hi; ++ow) irow[ow] += wv * grow[ow];
                            } else {
                                for (int ow = wo_lo; ow <= wo_hi; ++ow)
                                    irow[int64_t(ow) * stride_] += wv * grow[ow];
                            }
                        }
                    }
                }
            }
        }
        return gin;
    }

    void params(const std::string& prefix, std::vector<NamedParam<T>>& out) {
        out.push_back({prefix + ".weight", &weight_});
        out.push_back({prefix + ".bias", &bias_});
    }

    int in_channels() const { return in_ch_; }
    int out_channels() const { return out_ch_; }
    int64_t param_count() const { return weight_.value.numel() + bias_.value.numel(); }
    // Multiply-accumulate count for one (H, W) input plane set.
    int64_t macs(int h, int w) const {
        const int ho = (h + 2 * pad_ - k_) / stride_ + 1;
        const int wo = (w + 2 * pad_ - k_) / stride_ + 1;
        return int64_t(out_ch_) * in_ch_ * k_ * k_ * ho * wo;
    }

private:
    int in_ch_ = 0, out_ch_ = 0, k_ = 0, stride_ = 1, pad_ = 0;
    Parameter<T> weight_;
    Parameter<T> bias_;
};

template <class T>
class Linear {
public:
    Linear() = default;
    Linear(int in_dim, int out_dim) : in_(in_dim), out_(out_dim) {
        weight_.init({out_, in_});
        bias_.init({out_});
    }

    void init_params(Rng& rng, double gain = 1.0, bool zero = false) {
        if (zero) {
            weight_.value.fill(T(0));
            bias_.value.fill(T(0));
            return;
        }
        rng.fill_normal(weight_.value.data(), weight_.value.numel(), 0.0,
                        gain * std::sqrt(2.0 / double(in_)));
        bias_.value.fill(T(0));
    }

    Tensor<T> forward(const Tensor<T>& x, Cache<T>* cache) const {
        LPMRF_REQUIRE(x.rank() == 2 && x.dim(1) == in_, ShapeError,
                      "linear: expected (N,", in_, "), got ", x.shape_str());
        const int n = x.dim(0);
        Tensor<T> y({n, out_});
        if (cache) cache->at(this) = {x};
        const T* wp = weight_.value.data();
        LPMRF_OMP_FOR(int64_t(n) * out_ * in_ > 65536)
        for (int ni = 0; ni < n; ++ni) {
            const T* xi = x.data() + int64_t(ni) * in_;
            T* yi = y.data() + int64_t(ni) * out_;
            for (int o = 0; o < out_; ++o) {
                const T* wr = wp + int64_t(o) * in_;
                T acc = bias_.value[o];
                for (int i = 0; i < in_; ++i) acc += wr[i] * xi[i];
                yi[o] = acc;
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& cache) {
        const Tensor<T>& x = cache.at(this).at(0);
        const int n = x.dim(0);
        for (int o = 0; o < out_; ++o) {
            double gb = 0.0;
            for (int ni = 0; ni < n; ++ni) gb += double(gout.at(ni, o));
            bias_.grad[o] += T(gb);
        }
        T* gw = weight_.grad.data();
        LPMRF_OMP_FOR(int64_t(out_) * in_ * n > 65536)
        for (int o = 0; o < out_; ++o) {
            for (int i = 0; i < in_; ++i) {
                double acc = 0.0;
                for (int ni = 0; ni < n; ++ni) acc += double(gout.at(ni, o)) * double(x.at(ni, i));
                gw[int64_t(o) * in_ + i] += T(acc);
            }
        }
        Tensor<T> gin({n, in_});
        const T* wp = weight_.value.data();
        LPMRF_OMP_FOR(int64_t(n) * out_ * in_ > 65536)
        for (int ni = 0; ni < n; ++ni) {
            T* gi = gin.data() + int64_t(ni) * in_;
            const T* go = gout.data() + int64_t(ni) * out_;
            for (int o = 0; o < out_; ++o) {
                const T* wr = wp + int64_t(o) * in_;
                const T g = go[o];
                for (int i = 0; i < in_; ++i) gi[i] += g * wr[i];
            }
        }
        return gin;
    }

    void params(const std::string& prefix, std::vector<NamedParam<T>>& out) {
        out.push_back({prefix + ".weight", &weight_});
        out.push_back({prefix + ".bias", &bias_});
    }

private:
    int in_ = 0, out_ = 0;
    Parameter<T> weight_;
    Parameter<T> bias_;
};

template <class T>
class SiLU {
public:
    Tensor<T> forward(const Tensor<T>& x, Cache<T>* cache) const {
        Tensor<T> y = x;
        for (int64_t i = 0; i < y.numel(); ++i) {
            const T s = T(1) / (T(1) + std::exp(-x[i]));
            y[i] = x[i] * s;
        }
        if (cache) cache->at(this) = {x};
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& cache) const {
        const Tensor<T>& x = cache.at(this).at(0);
        Tensor<T> gin = gout;
        for (int64_t i = 0; i < gin.numel(); ++i) {
            const T s = T(1) / (T(1) + std::exp(-x[i]));
            gin[i] = gout[i] * s * (T(1) + x[i] * (T(1) - s));
        }
        return gin;
    }
};

template <class T>
class Sigmoid {
public:
    Tensor<T> forward(const Tensor<T>& x, Cache<T>* cache) const {
        Tensor<T> y = x;
        for (int64_t i = 0; i < y.numel(); ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
        if (cache) cache->at(this) = {y};
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& cache) const {
        const Tensor<T>& y = cache.at(this).at(0);
        Tensor<T> gin = gout;
        for (int64_t i = 0; i < gin.numel(); ++i) gin[i] = gout[i] * y[i] * (T(1) - y[i]);
        return gin;
    }
};

// Normalizes the channel vector at each spatial location independently,
// then applies a per-channel affine. Variance uses the biased 1/C estimator.
template <class T>
class PixelwiseLayerNorm {
public:
    static constexpr double kEps = 1e-6;

    PixelwiseLayerNorm() = default;
    explicit PixelwiseLayerNorm(int channels) : ch_(channels) {
        scale_.init({ch_});
        bias_.init({ch_});
        scale_.value.fill(T(1));
    }

    Tensor<T> forward(const Tensor<T>& x, Cache<T>* cache) const {
        LPMRF_REQUIRE(x.rank() == 4 && x.dim(1) == ch_, ShapeError,
                      "pixel_norm: expected (N,", ch_, ",H,W), got ", x.shape_str());
        const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
        const int64_t plane = int64_t(h) * w;
        Tensor<T> xhat(x.shape());
        Tensor<T> inv_std({n, 1, h, w});
        Tensor<T> y(x.shape());
        const int64_t jobs = int64_t(n) * plane;
        LPMRF_OMP_FOR(jobs* ch_ > 16384)
        for (int64_t job = 0; job < jobs; ++job) {
            const int64_t ni = job / plane, hw = job % plane;
            const T* xc = x.data() + ni * ch_ * plane + hw;
            double mean = 0.0;
            for (int c = 0; c < ch_; ++c) mean += double(xc[c * plane]);
            mean /= ch_;
            double var = 0.0;
            for (int c = 0; c < ch_; ++c) {
                const double d = double(xc[c * plane]) - mean;
                var += d * d;
            }
            var /= ch_;
            const double is = 1.0 / std::sqrt(var + kEps);
            inv_std[job] = T(is);
            T* xh = xhat.data() + ni * ch_ * plane + hw;
            T* yy = y.data() + ni * ch_ * plane + hw;
            for (int c = 0; c < ch_; ++c) {
                const T v = T((double(xc[c * plane]) - mean) * is);
                xh[c * plane] = v;
                yy[c * plane] = scale_.value[c] * v + bias_.value[c];
            }
        }
        if (cache) cache->at(this) = {xhat, inv_std};
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& cache) {
        const Tensor<T>& xhat = cache.at(this).at(0);
        const Tensor<T>& inv_std = cache.at(this).at(1);
        const int n = gout.dim(0), h = gout.dim(2), w = gout.dim(3);
        const int64_t plane = int64_t(h) * w;
        Tensor<T> gin(gout.shape());

        for (int c = 0; c < ch_; ++c) {
            double gs = 0.0, gb = 0.0;
            for (int ni = 0; ni < n; ++ni) {
                const T* g = gout.data() + (int64_t(ni) * ch_ + c) * plane;
                const T* xh = xhat.data() + (int64_t(ni) * ch_ + c) * plane;
                for (int64_t i = 0; i < plane; ++i) {
                    gs += double(g[i]) * double(xh[i]);
                    gb += double(g[i]);
                }
            }
            scale_.grad[c] += T(gs);
            bias_.grad[c] += T(gb);
        }

        const int64_t jobs = int64_t(n) * plane;
        LPMRF_OMP_FOR(jobs* ch_ > 16384)
        for (int64_t job = 0; job < jobs; ++job) {
            const int64_t ni = job / plane, hw = job % plane;
            const T* g = gout.data() + ni * ch_ * plane + hw;
            const T* xh = xhat.data() + ni * ch_ * plane + hw;
            T* gi = gin.data() + ni * ch_ * plane + hw;
            double m1 = 0.0, m2 = 0.0;
            for (int c = 0; c < ch_; ++c) {
                const double gg = double(g[c * plane]) * double(scale_.value[c]);
                m1 += gg;
                m2 += gg * double(xh[c * plane]);
            }
            m1 /= ch_;
            m2 /= ch_;
            const double is = double(inv_std[job]);
            for (int c = 0; c < ch_; ++c) {
                const double gg = double(g[c * plane]) * double(scale_.value[c]);
                gi[c * plane] = T((gg - m1 - double(xh[c * plane]) * m2) * is);
            }
        }
        return gin;
    }

    void params(const std::string& prefix, std::vector<NamedParam<T>>& out) {
        out.push_back({prefix + ".scale", &scale_});
        out.push_back({prefix + ".bias", &bias_});
    }

    int channels() const { return ch_; }

private:
    int ch_ = 0;
    Parameter<T> scale_;
    Parameter<T> bias_;
};

// Group normalization over (C/G, H, W) slices; the SD-VAE-style baseline.
template <class T>
class GroupNorm {
public:
    static constexpr double kEps = 1e-6;

    GroupNorm() = default;
    GroupNorm(int channels, int groups = 32)
        : ch_(channels), groups_(groups > channels ? channels : groups) {
        LPMRF_REQUIRE(ch_ % groups_ == 0, ConfigError,
                      "group_norm: channels ", ch_, " not divisible by groups ", groups_);
        scale_.init({ch_});
        bias_.init({ch_});
        scale_.value.fill(T(1));
    }

    Tensor<T> forward(const Tensor<T>& x, Cache<T>* cache) const {
        LPMRF_REQUIRE(x.rank() == 4 && x.dim(1) == ch_, ShapeError,
                      "group_norm: expected (N,", ch_, ",H,W), got ", x.shape_str());
        const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
        const int cg = ch_ / groups_;
        const int64_t plane = int64_t(h) * w;
        const int64_t gsize = int64_t(cg) * plane;
        Tensor<T> xhat(x.shape());
        Tensor<T> inv_std({n, groups_});
        Tensor<T> y(x.shape());
        for (int ni = 0; ni < n; ++ni) {
            for (int g = 0; g < groups_; ++g) {
                const T* xs = x.data() + (int64_t(ni) * ch_ + int64_t(g) * cg) * plane;
                double mean = 0.0;
                for (int64_t i = 0; i < gsize; ++i) mean += double(xs[i]);
                mean /= double(gsize);
                double var = 0.0;
                for (int64_t i = 0; i < gsize; ++i) {
                    const double d = double(xs[i]) - mean;
                    var += d * d;
                }
                var /= double(gsize);
                const double is = 1.0 / std::sqrt(var + kEps);
                inv_std.at(ni, g) = T(is);
                T* xh = xhat.data() + (int64_t(ni) * ch_ + int64_t(g) * cg) * plane;
                T* yy = y.data() + (int64_t(ni) * ch_ + int64_t(g) * cg) * plane;
                for (int c = 0; c < cg; ++c) {
                    const T sc = scale_.value[g * cg + c], bi = bias_.value[g * cg + c];
                    for (int64_t i = 0; i < plane; ++i) {
                        const T v = T((double(xs[c * plane + i]) - mean) * is);
                        xh[c * plane + i] = v;
                        yy[c * plane + i] = sc * v + bi;
                    }
                }
            }
        }
        if (cache) cache->at(this) = {xhat, inv_std};
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>& cache) {
        const Tensor<T>& xhat = cache.at(this).at(0);
        const Tensor<T>& inv_std = cache.at(this).at(1);
        const int n = gout.dim(0), h = gout.dim(2), w = gout.dim(3);
        const int cg = ch_ / groups_;
        const int64_t plane = int64_t(h) * w;
        const int64_t gsize = int64_t(cg) * plane;
        Tensor<T> gin(gout.shape());

        for (int c = 0; c < ch_; ++c) {
            double gs = 0.0, gb = 0.0;
            for (int ni = 0; ni < n; ++ni) {
                const T* g = gout.data() + (int64_t(ni) * ch_ + c) * plane;
                const T* xh = xhat.data() + (int64_t(ni) * ch_ + c) * plane;
                for (int64_t i = 0; i < plane; ++i) {
                    gs += double(g[i]) * double(xh[i]);
                    gb += double(g[i]);
                }
            }
            scale_.grad[c] += T(gs);
            bias_.grad[c] += T(gb);
        }

        for (int ni = 0; ni < n; ++ni) {
            for (int g = 0; g < groups_; ++g) {
                const int64_t base = (int64_t(ni) * ch_ + int64_t(g) * cg) * plane;
                const T* go = gout.data() + base;
                const T* xh = xhat.data() + base;
                T* gi = gin.data() + base;
                double m1 = 0.0, m2 = 0.0;
                for (int c = 0; c < cg; ++c) {
                    const double sc = double(scale_.value[g * cg + c]);
                    for (int64_t i = 0; i < plane; ++i) {
                        const double gg = double(go[c * plane + i]) * sc;
                        m1 += gg;
                        m2 += gg * double(xh[c * plane + i]);
                    }
                }
                m1 /= double(gsize);
                m2 /= double(gsize);
                const double is = double(inv_std.at(ni, g));
                for (int c = 0; c < cg; ++c) {
                    const double sc = double(scale_.value[g * cg + c]);
                    for (int64_t i = 0; i < plane; ++i) {
                        const double gg = double(go[c * plane + i]) * sc;
                        gi[c * plane + i] = T((gg - m1 - double(xh[c * plane + i]) * m2) * is);
                    }
                }
            }
        }
        return gin;
    }

    void params(const std::string& prefix, std::vector<NamedParam<T>>& out) {
        out.push_back({prefix + ".scale", &scale_});
        out.push_back({prefix + ".bias", &bias_});
    }

private:
    int ch_ = 0, groups_ = 0;
    Parameter<T> scale_;
    Parameter<T> bias_;
};

template <class T>
class NearestUpsample2x {
public:
    Tensor<T> forward(const Tensor<T>& x, Cache<T>*) const {
        const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        Tensor<T> y({n, c, 2 * h, 2 * w});
        for (int64_t nc = 0; nc < int64_t(n) * c; ++nc) {
            const T* in = x.data() + nc * h * w;
            T* out = y.data() + nc * 4 * h * w;
            for (int i = 0; i < h; ++i) {
                for (int j = 0; j < w; ++j) {
                    const T v = in[int64_t(i) * w + j];
                    T* o = out + int64_t(2 * i) * 2 * w + 2 * j;
                    o[0] = v;
                    o[1] = v;
                    o[2 * w] = v;
                    o[2 * w + 1] = v;
                }
            }
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& gout, Cache<T>&) const {
        const int n = gout.dim(0), c = gout.dim(1), h2 = gout.dim(2), w2 = gout.dim(3);
        const int h = h2 / 2, w = w2 / 2;
        Tensor<T> gin({n, c, h, w});
        for (int64_t nc = 0; nc < int64_t(n) * c; ++nc) {
            const T* g = gout.data() + nc * h2 * w2;
            T* gi = gin.data() + nc * h * w;
            for (int i = 0; i < h; ++i) {
                for (int j = 0; j < w; ++j) {
                    const T* s = g + int64_t(2 * i) * w2 + 2 * j;
                    gi[int64_t(i) * w + j] = s[0] + s[1] + s[w2] + s[w2 + 1];
                }
            }
        }
        return gin;
    }
};

}  // namespace lpmrf::nn
