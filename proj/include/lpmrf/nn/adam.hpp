// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <vector>

#include "lpmrf/nn/module.hpp"

namespace lpmrf::nn {

// Constant warmup followed by cosine decay from peak_lr to min_lr. A fixed
// learning rate is the special case warmup_steps = 0, min_lr = peak_lr.
struct LrSchedule {
    double peak_lr = 1e-4;
    double min_lr = 1e-6;
    double warmup_lr = 1e-5;
    int warmup_steps = 0;
    int total_steps = 1;
    bool cosine = true;

    double at(int step) const {
        if (step < warmup_steps) return warmup_lr;
        if (!cosine) return peak_lr;
        const int span = total_steps - warmup_steps;
        if (span <= 1) return peak_lr;
        const double u = double(step - warmup_steps) / double(span - 1);
        return min_lr + 0.5 * (peak_lr - min_lr) * (1.0 + std::cos(3.14159265358979323846 * u));
    }

    static LrSchedule fixed(double lr, int steps) {
        return {lr, lr, lr, 0, steps, false};
    }
};

template <class T>
class Adam {
public:
    struct Options {
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
        double clip_norm = 0.0;  // 0 disables clipping
    };

    Adam(std::vector<NamedParam<T>> params, Options opt = {})
        : params_(std::move(params)), opt_(opt) {
        m_.reserve(params_.size());
        v_.reserve(params_.size());
        for (auto& np : params_) {
            m_.push_back(Tensor<double>(np.param->value.shape()));
            v_.push_back(Tensor<double>(np.param->value.shape()));
        }
    }

    // Returns the global gradient norm before clipping (NaN check lives with callers).
    double step(double lr) {
        ++t_;
        double norm_sq = 0.0;
        for (auto& np : params_) {
            const Tensor<T>& g = np.param->grad;
            for (int64_t i = 0; i < g.numel(); ++i) norm_sq += double(g[i]) * double(g[i]);
        }
        const double norm = std::sqrt(norm_sq);
        double scale = 1.0;
        if (opt_.clip_norm > 0.0 && norm > opt_.clip_norm) scale = opt_.clip_norm / norm;

        const double bc1 = 1.0 - std::pow(opt_.beta1, t_);
        const double bc2 = 1.0 - std::pow(opt_.beta2, t_);
        for (size_t p = 0; p < params_.size(); ++p) {
            Tensor<T>& value = params_[p].param->value;
            const Tensor<T>& grad = params_[p].param->grad;
            Tensor<double>& m = m_[p];
            Tensor<double>& v = v_[p];
            for (int64_t i = 0; i < value.numel(); ++i) {
                const double g = double(grad[i]) * scale;
                m[i] = opt_.beta1 * m[i] + (1.0 - opt_.beta1) * g;
                v[i] = opt_.beta2 * v[i] + (1.0 - opt_.beta2) * g * g;
                const double mh = m[i] / bc1;
                const double vh = v[i] / bc2;
                value[i] = T(double(value[i]) - lr * mh / (std::sqrt(vh) + opt_.eps));
            }
        }
        return norm;
    }

    void zero_grad() { zero_grads(params_); }
    const std::vector<NamedParam<T>>& params() const { return params_; }

private:
    std::vector<NamedParam<T>> params_;
    Options opt_;
    std::vector<Tensor<double>> m_;
    std::vector<Tensor<double>> v_;
    int t_ = 0;
};

}  // namespace lpmrf::nn
