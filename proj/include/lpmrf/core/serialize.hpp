// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpmrf/core/error.hpp"
#include "lpmrf/core/tensor.hpp"
#include "lpmrf/nn/module.hpp"

namespace lpmrf {

// Single-file binary container: a JSON header (config, metadata, latent
// normalization statistics) followed by named float32 tensors, little-endian.
// Documented in FORMATS.md.
struct Checkpoint {
    nlohmann::json meta;
    std::map<std::string, Tensor<float>> tensors;

    static constexpr uint32_t kMagic = 0x4b435046;  // "FPCK"
    static constexpr uint32_t kVersion = 1;

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        LPMRF_REQUIRE(f.good(), IoError, "cannot open checkpoint for writing: ", path);
        write_u32(f, kMagic);
        write_u32(f, kVersion);
        const std::string header = meta.dump();
        write_u64(f, header.size());
        f.write(header.data(), std::streamsize(header.size()));
        write_u32(f, uint32_t(tensors.size()));
        for (const auto& [name, t] : tensors) {
            write_u32(f, uint32_t(name.size()));
            f.write(name.data(), std::streamsize(name.size()));
            write_u32(f, uint32_t(t.rank()));
            for (int i = 0; i < t.rank(); ++i) write_u32(f, uint32_t(t.dim(i)));
            f.write(reinterpret_cast<const char*>(t.data()),
                    std::streamsize(size_t(t.numel()) * sizeof(float)));
        }
        LPMRF_REQUIRE(f.good(), IoError, "short write to checkpoint: ", path);
    }

    static Checkpoint load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        LPMRF_REQUIRE(f.good(), DependencyError, "checkpoint not found: ", path);
        Checkpoint ck;
        LPMRF_REQUIRE(read_u32(f) == kMagic, IoError, "not a checkpoint file: ", path);
        LPMRF_REQUIRE(read_u32(f) == kVersion, IoError, "unsupported checkpoint version: ", path);
        const uint64_t hlen = read_u64(f);
        std::string header(hlen, '\0');
        f.read(header.data(), std::streamsize(hlen));
        ck.meta = nlohmann::json::parse(header);
        const uint32_t n = read_u32(f);
        for (uint32_t i = 0; i < n; ++i) {
            const uint32_t nlen = read_u32(f);
            std::string name(nlen, '\0');
            f.read(name.data(), std::streamsize(nlen));
            const uint32_t rank = read_u32(f);
            std::vector<int> shape(rank);
            for (auto& d : shape) d = int(read_u32(f));
            Tensor<float> t(shape);
            f.read(reinterpret_cast<char*>(t.data()),
                   std::streamsize(size_t(t.numel()) * sizeof(float)));
            ck.tensors.emplace(std::move(name), std::move(t));
        }
        LPMRF_REQUIRE(f.good(), IoError, "truncated checkpoint: ", path);
        return ck;
    }

private:
    static void write_u32(std::ofstream& f, uint32_t v) {
        f.write(reinterpret_cast<const char*>(&v), 4);
    }
    static void write_u64(std::ofstream& f, uint64_t v) {
        f.write(reinterpret_cast<const char*>(&v), 8);
    }
    static uint32_t read_u32(std::ifstream& f) {
        uint32_t v = 0;
        f.read(reinterpret_cast<char*>(&v), 4);
        return v;
    }
    static uint64_t read_u64(std::ifstream& f) {
        uint64_t v = 0;
        f.read(reinterpret_cast<char*>(&v), 8);
        return v;
    }
};

// Copies module parameters into / out of a checkpoint by canonical name.
template <class T>
void store_params(Checkpoint& ck, const std::vector<nn::NamedParam<T>>& params) {
    for (const auto& np : params) ck.tensors[np.name] = np.param->value.template cast<float>();
}

template <class T>
void load_params(const Checkpoint& ck, const std::vector<nn::NamedParam<T>>& params) {
    for (const auto& np : params) {
        auto it = ck.tensors.find(np.name);
        LPMRF_REQUIRE(it != ck.tensors.end(), IoError, "checkpoint missing tensor: ", np.name);
        LPMRF_REQUIRE(it->second.shape() == np.param->value.shape(), ShapeError,
                      "checkpoint tensor ", np.name, " has shape ", it->second.shape_str(),
                      ", expected ", np.param->value.shape_str());
        np.param->value = it->second.template cast<T>();
    }
}

}  // namespace lpmrf
