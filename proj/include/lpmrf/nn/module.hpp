// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lpmrf/core/tensor.hpp"

namespace lpmrf::nn {

template <class T>
struct Parameter {
    Tensor<T> value;
    Tensor<T> grad;

    void init(std::vector<int> shape) {
        value = Tensor<T>(shape);
        grad = Tensor<T>(std::move(shape));
    }
    void zero_grad() { grad.fill(T(0)); }
};

template <class T>
struct NamedParam {
    std::string name;
    Parameter<T>* param;
};

// Per-forward-pass activation storage, owned by the caller. Training passes a
// cache so backward can replay intermediates; inference passes nullptr and the
// whole forward path stays const (safe for concurrent callers).
template <class T>
class Cache {
public:
    std::vector<Tensor<T>>& at(const void* key) { return slots_[key]; }
    void clear() { slots_.clear(); }

private:
    std::unordered_map<const void*, std::vector<Tensor<T>>> slots_;
};

template <class T>
void zero_grads(const std::vector<NamedParam<T>>& params) {
    for (auto& np : params) np.param->zero_grad();
}

template <class T>
int64_t param_count(const std::vector<NamedParam<T>>& params) {
    int64_t n = 0;
    for (auto& np : params) n += np.param->value.numel();
    return n;
}

// Counts of structural ops per block, used by the architecture audits.
struct OpAudit {
    int normalizations = 0;
    int activations = 0;
    int convolutions = 0;

    OpAudit& operator+=(const OpAudit& o) {
        normalizations += o.normalizations;
        activations += o.activations;
        convolutions += o.convolutions;
        return *this;
    }
};

}  // namespace lpmrf::nn
