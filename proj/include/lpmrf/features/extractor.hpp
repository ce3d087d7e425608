// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "lpmrf/core/image.hpp"
#include "lpmrf/core/serialize.hpp"
#include "lpmrf/metrics/metrics.hpp"
#include "lpmrf/nn/layers.hpp"

namespace lpmrf::features {

// Fixed random-weight conv net with global average pooling. Weights are
// seed-pinned and never trained; the same instance backs the perceptual loss
// (via feature maps) and the distributional metrics (via pooled embeddings).
template <class T>
class FeatureExtractor {
public:
    struct Maps {
        std::vector<Tensor<T>> levels;
    };

    FeatureExtractor(int in_channels = 3, int dim = 64, uint64_t seed = 1234)
        : in_ch_(in_channels), dim_(dim), seed_(seed),
          conv1_(in_channels, 16, 3, 2), conv2_(16, 32, 3, 2), conv3_(32, dim, 3, 2) {
        Rng rng(seed, 0xfea7);
        conv1_.init_params(rng);
        conv2_.init_params(rng);
        conv3_.init_params(rng);
    }

    std::string id() const {
        return "randconv-v1-s" + std::to_string(seed_) + "-d" + std::to_string(dim_);
    }
    int dim() const { return dim_; }

    Maps forward_maps(const Tensor<T>& x, nn::Cache<T>* cache) const {
        Maps m;
        Tensor<T> h = act1_.forward(conv1_.forward(x, cache), cache);
        m.levels.push_back(h);
        h = act2_.forward(conv2_.forward(h, cache), cache);
        m.levels.push_back(h);
        h = act3_.forward(conv3_.forward(h, cache), cache);
        m.levels.push_back(h);
        return m;
    }

    // Backward of a loss defined on the three level maps.
    Tensor<T> backward_maps(const std::vector<Tensor<T>>& level_grads, nn::Cache<T>& cache) {
        Tensor<T> g = act3_.backward(level_grads.at(2), cache);
        g = conv3_.backward(g, cache);
        g.add_(level_grads.at(1));
        g = act2_.backward(g, cache);
        g = conv2_.backward(g, cache);
        g.add_(level_grads.at(0));
        g = act1_.backward(g, cache);
        return conv1_.backward(g, cache);
    }

    // (N, dim) global-average-pooled embeddings.
    Tensor<T> pooled(const Tensor<T>& x) const {
        Maps m = forward_maps(x, nullptr);
        const Tensor<T>& top = m.levels.back();
        const int n = top.dim(0), c = top.dim(1);
        const int64_t plane = int64_t(top.dim(2)) * top.dim(3);
        Tensor<T> out({n, c});
        for (int ni = 0; ni < n; ++ni)
            for (int cc = 0; cc < c; ++cc) {
                const T* p = top.data() + (int64_t(ni) * c + cc) * plane;
                double acc = 0.0;
                for (int64_t i = 0; i < plane; ++i) acc += double(p[i]);
                out.at(ni, cc) = T(acc / double(plane));
            }
        return out;
    }

    void params(const std::string& prefix, std::vector<nn::NamedParam<T>>& out) {
        conv1_.params(prefix + ".conv1", out);
        conv2_.params(prefix + ".conv2", out);
        conv3_.params(prefix + ".conv3", out);
    }

    void save(const std::string& path) {
        Checkpoint ck;
        ck.meta["kind"] = "feature_extractor";
        ck.meta["seed"] = seed_;
        ck.meta["dim"] = dim_;
        ck.meta["in_channels"] = in_ch_;
        ck.meta["extractor_id"] = id();
        std::vector<nn::NamedParam<T>> ps;
        params("extractor", ps);
        store_params(ck, ps);
        ck.save(path);
    }

    static FeatureExtractor load(const std::string& path) {
        Checkpoint ck = Checkpoint::load(path);
        LPMRF_REQUIRE(ck.meta.value("kind", "") == "feature_extractor", IoError,
                      path, " is not a feature extractor checkpoint");
        FeatureExtractor fe(ck.meta["in_channels"].get<int>(), ck.meta["dim"].get<int>(),
                            ck.meta["seed"].get<uint64_t>());
        std::vector<nn::NamedParam<T>> ps;
        fe.params("extractor", ps);
        load_params(ck, ps);
        return fe;
    }

private:
    int in_ch_, dim_;
    uint64_t seed_;
    nn::Conv2d<T> conv1_, conv2_, conv3_;
    nn::SiLU<T> act1_, act2_, act3_;
};

// Perceptual distance: mean absolute difference of feature maps, averaged over
// levels. Gradient is with respect to the first argument.
template <class T>
double perceptual_l1(const typename FeatureExtractor<T>::Maps& a,
                     const typename FeatureExtractor<T>::Maps& b,
                     std::vector<Tensor<T>>* grad_a = nullptr) {
    const size_t levels = a.levels.size();
    double total = 0.0;
    if (grad_a) grad_a->clear();
    for (size_t l = 0; l < levels; ++l) {
        const Tensor<T>& fa = a.levels[l];
        const Tensor<T>& fb = b.levels[l];
        total += mean_abs_error(fa, fb);
        if (grad_a) {
            Tensor<T> g(fa.shape());
            const double scale = 1.0 / (double(fa.numel()) * double(levels));
            for (int64_t i = 0; i < fa.numel(); ++i)
                g[i] = T((fa[i] > fb[i] ? 1.0 : (fa[i] < fb[i] ? -1.0 : 0.0)) * scale);
            grad_a->push_back(std::move(g));
        }
    }
    return total / double(levels);
}

// Embeds a set of images under the extractor, producing the metric-space view.
metrics::FeatureSet extract_features(const FeatureExtractor<float>& extractor,
                                     const std::vector<Image>& images);

}  // namespace lpmrf::features
