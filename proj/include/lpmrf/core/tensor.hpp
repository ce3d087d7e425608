// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "lpmrf/core/error.hpp"
#include "lpmrf/core/rng.hpp"

namespace lpmrf {

// Dense row-major tensor of rank <= 4. Images are (3, H, W), batched
// activations are (N, C, H, W), flat feature sets are (N, D).
template <class T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        LPMRF_REQUIRE(shape_.size() >= 1 && shape_.size() <= 4, ShapeError,
                      "tensor rank must be 1..4, got ", shape_.size());
        int64_t n = 1;
        for (int d : shape_) {
            LPMRF_REQUIRE(d > 0, ShapeError, "non-positive tensor dimension ", d);
            n *= d;
        }
        data_.assign(size_t(n), T(0));
    }

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<int> shape, T value) {
        Tensor t(std::move(shape));
        std::fill(t.data_.begin(), t.data_.end(), value);
        return t;
    }

    static Tensor randn(std::vector<int> shape, Rng& rng, double mean = 0.0, double stddev = 1.0) {
        Tensor t(std::move(shape));
        rng.fill_normal(t.data(), t.numel(), mean, stddev);
        return t;
    }

    bool empty() const { return data_.empty(); }
    int rank() const { return int(shape_.size()); }
    int dim(int i) const { return shape_[size_t(i)]; }
    const std::vector<int>& shape() const { return shape_; }
    int64_t numel() const { return int64_t(data_.size()); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T& operator[](int64_t i) { return data_[size_t(i)]; }
    const T& operator[](int64_t i) const { return data_[size_t(i)]; }

    // (n, c, h, w) indexing for rank-4, (c, h, w) for rank-3, (n, d) for rank-2.
    T& at(int a, int b, int c, int d) {
        return data_[size_t(((int64_t(a) * shape_[1] + b) * shape_[2] + c) * shape_[3] + d)];
    }
    const T& at(int a, int b, int c, int d) const {
        return data_[size_t(((int64_t(a) * shape_[1] + b) * shape_[2] + c) * shape_[3] + d)];
    }
    T& at(int a, int b, int c) {
        return data_[size_t((int64_t(a) * shape_[1] + b) * shape_[2] + c)];
    }
    const T& at(int a, int b, int c) const {
        return data_[size_t((int64_t(a) * shape_[1] + b) * shape_[2] + c)];
    }
    T& at(int a, int b) { return data_[size_t(int64_t(a) * shape_[1] + b)]; }
    const T& at(int a, int b) const { return data_[size_t(int64_t(a) * shape_[1] + b)]; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    Tensor reshaped(std::vector<int> shape) const {
        Tensor t;
        t.shape_ = std::move(shape);
        int64_t n = 1;
        for (int d : t.shape_) n *= d;
        LPMRF_REQUIRE(n == numel(), ShapeError, "reshape changes element count ", numel(), " -> ", n);
        t.data_ = data_;
        return t;
    }

    template <class U>
    Tensor<U> cast() const {
        Tensor<U> t;
        t.set_raw(shape_, std::vector<U>(data_.begin(), data_.end()));
        return t;
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    void add_(const Tensor& o, T scale = T(1)) {
        LPMRF_REQUIRE(same_shape(o), ShapeError, "add_: shape mismatch");
        const T* p = o.data();
        for (int64_t i = 0; i < numel(); ++i) data_[size_t(i)] += scale * p[i];
    }

    void scale_(T s) {
        for (auto& v : data_) v *= s;
    }

    void clamp_(T lo, T hi) {
        for (auto& v : data_) v = std::min(hi, std::max(lo, v));
    }

    bool all_finite() const {
        for (T v : data_)
            if (!std::isfinite(double(v))) return false;
        return true;
    }

    std::string shape_str() const {
        std::string s = "(";
        for (size_t i = 0; i < shape_.size(); ++i) s += (i ? "," : "") + std::to_string(shape_[i]);
        return s + ")";
    }

    // Internal constructor used by cast().
    void set_raw(std::vector<int> shape, std::vector<T> data) {
        shape_ = std::move(shape);
        data_ = std::move(data);
    }

private:
    std::vector<int> shape_;
    std::vector<T> data_;
};

template <class T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    LPMRF_REQUIRE(a.same_shape(b), ShapeError, "max_abs_diff: shape mismatch ",
                  a.shape_str(), " vs ", b.shape_str());
    double m = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(double(a[i]) - double(b[i])));
    return m;
}

template <class T>
double mean_squared_error(const Tensor<T>& a, const Tensor<T>& b) {
    LPMRF_REQUIRE(a.same_shape(b), ShapeError, "mse: shape mismatch ",
                  a.shape_str(), " vs ", b.shape_str());
    double acc = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) {
        const double d = double(a[i]) - double(b[i]);
        acc += d * d;
    }
    return acc / double(a.numel());
}

template <class T>
double mean_abs_error(const Tensor<T>& a, const Tensor<T>& b) {
    LPMRF_REQUIRE(a.same_shape(b), ShapeError, "l1: shape mismatch");
    double acc = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) acc += std::abs(double(a[i]) - double(b[i]));
    return acc / double(a.numel());
}

}  // namespace lpmrf
