// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "lpmrf/degrade/degrade.hpp"
#include "lpmrf/flow/flow.hpp"
#include "lpmrf/pm/pm.hpp"
#include "lpmrf/vae/vae.hpp"

namespace lpmrf::cli {

struct DataSection {
    int n_train = 200;
    int n_test = 50;
    int image_size = 32;
};

struct VaeTrainSection {
    int steps = 2000;
    int batch_size = 8;
    double lr_peak = 1e-4;
    double lr_min = 1e-6;
    double lr_warmup = 1e-5;
    int warmup_steps = 500;
};

struct PmTrainSection {
    int steps = 2000;
    int batch_size = 8;
    double lr = 1e-3;
};

struct FlowTrainSection {
    int steps = 3000;
    int batch_size = 16;
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double clip_norm = 1.0;
};

struct MetricsSection {
    int feature_dim = 64;
    uint64_t extractor_seed = 1234;
    int msssim_scales = 3;
    double mmd_bandwidth = 0.0;  // 0 = median heuristic
};

// Fully resolved run configuration. Unknown keys are rejected at every level;
// the resolved snapshot is written next to each command's artifacts.
struct RunConfig {
    uint64_t seed = 0;
    std::string output_dir = "runs";
    std::string device = "cpu";
    int threads = 0;  // 0 = runtime default
    int validation_interval = 200;

    DataSection data;
    degradation::DegradationRanges degr;
    vae::SimVAEConfig vae_cfg = desk_vae_defaults();
    VaeTrainSection vae_train;
    pm::PmNetConfig pm_cfg = desk_pm_defaults();
    PmTrainSection pm_train;
    flow::VelocityNetConfig flow_cfg = desk_flow_defaults();
    FlowTrainSection flow_train;
    std::string flow_space = "latent";
    int sampler_steps = 25;
    MetricsSection metrics;

    static vae::SimVAEConfig desk_vae_defaults();
    static pm::PmNetConfig desk_pm_defaults();
    static flow::VelocityNetConfig desk_flow_defaults();

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);

    // "section.key=value" overrides; values parsed as JSON with string
    // fallback. All overrides land before the config is re-validated.
    void apply_overrides(const std::vector<std::string>& specs);
    void apply_override(const std::string& spec) { apply_overrides({spec}); }

    // Stage-scoped deterministic seeds.
    uint64_t stage_seed(const char* stage) const;
};

}  // namespace lpmrf::cli
