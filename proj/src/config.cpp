// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#include "lpmrf/cli/config.hpp"

#include <fstream>

namespace lpmrf::cli {

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const char* section) {
    if (!j.is_object()) throw ValidationError(std::string(section) + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok |= (it.key() == k);
        LPMRF_REQUIRE(ok, ValidationError, "unknown key \"", it.key(), "\" in section [", section,
                      "]");
    }
}

}  // namespace

vae::SimVAEConfig RunConfig::desk_vae_defaults() {
    vae::SimVAEConfig c;
    c.base_channels = 16;
    c.channel_multipliers = {1, 2, 2};
    c.blocks_per_stage = 1;
    c.latent_channels = 16;
    c.downsample_factor = 4;
    return c;
}

pm::PmNetConfig RunConfig::desk_pm_defaults() {
    pm::PmNetConfig c;
    c.base_channels = 16;
    c.channel_multipliers = {1, 2, 2};
    c.blocks_per_level = 1;
    return c;
}

flow::VelocityNetConfig RunConfig::desk_flow_defaults() {
    flow::VelocityNetConfig c;
    c.state_channels = 16;
    c.base_channels = 24;
    c.channel_multipliers = {1, 2};
    c.blocks_per_level = 1;
    c.time_embed_dim = 32;
    return c;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["device"] = device;
    j["threads"] = threads;
    j["validation_interval"] = validation_interval;
    j["data"] = {{"n_train", data.n_train}, {"n_test", data.n_test},
                 {"image_size", data.image_size}};
    j["degradation"] = degr.to_json();
    j["vae"] = vae_cfg.to_json();
    j["vae"]["train"] = {{"steps", vae_train.steps},
                         {"batch_size", vae_train.batch_size},
                         {"lr_peak", vae_train.lr_peak},
                         {"lr_min", vae_train.lr_min},
                         {"lr_warmup", vae_train.lr_warmup},
                         {"warmup_steps", vae_train.warmup_steps}};
    j["posterior_mean"] = pm_cfg.to_json();
    j["posterior_mean"]["train"] = {{"steps", pm_train.steps},
                                    {"batch_size", pm_train.batch_size},
                                    {"lr", pm_train.lr}};
    j["flow"] = flow_cfg.to_json();
    j["flow"]["space"] = flow_space;
    j["flow"]["train"] = {{"steps", flow_train.steps},     {"batch_size", flow_train.batch_size},
                          {"lr", flow_train.lr},           {"beta1", flow_train.beta1},
                          {"beta2", flow_train.beta2},     {"clip_norm", flow_train.clip_norm}};
    j["pipeline"] = {{"sampler_steps", sampler_steps}};
    j["metrics"] = {{"feature_dim", metrics.feature_dim},
                    {"extractor_seed", metrics.extractor_seed},
                    {"msssim_scales", metrics.msssim_scales},
                    {"mmd_bandwidth", metrics.mmd_bandwidth}};
    return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    check_keys(j,
               {"seed", "output_dir", "device", "threads", "validation_interval", "data",
                "degradation", "vae", "posterior_mean", "flow", "pipeline", "metrics"},
               "root");
    RunConfig c;
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.device = j.value("device", c.device);
    LPMRF_REQUIRE(c.device == "cpu", ValidationError, "device must be \"cpu\", got ", c.device);
    c.threads = j.value("threads", c.threads);
    c.validation_interval = j.value("validation_interval", c.validation_interval);

    if (j.contains("data")) {
        check_keys(j["data"], {"n_train", "n_test", "image_size"}, "data");
        c.data.n_train = j["data"].value("n_train", c.data.n_train);
        c.data.n_test = j["data"].value("n_test", c.data.n_test);
        c.data.image_size = j["data"].value("image_size", c.data.image_size);
        LPMRF_REQUIRE(c.data.n_train >= 1 && c.data.n_test >= 0 && c.data.image_size >= 8,
                      ValidationError, "invalid [data] section");
    }
    if (j.contains("degradation")) c.degr = degradation::DegradationRanges::from_json(j["degradation"]);

    if (j.contains("vae")) {
        nlohmann::json v = j["vae"];
        if (v.contains("train")) {
            check_keys(v["train"],
                       {"steps", "batch_size", "lr_peak", "lr_min", "lr_warmup", "warmup_steps"},
                       "vae.train");
            c.vae_train.steps = v["train"].value("steps", c.vae_train.steps);
            c.vae_train.batch_size = v["train"].value("batch_size", c.vae_train.batch_size);
            c.vae_train.lr_peak = v["train"].value("lr_peak", c.vae_train.lr_peak);
            c.vae_train.lr_min = v["train"].value("lr_min", c.vae_train.lr_min);
            c.vae_train.lr_warmup = v["train"].value("lr_warmup", c.vae_train.lr_warmup);
            c.vae_train.warmup_steps = v["train"].value("warmup_steps", c.vae_train.warmup_steps);
            v.erase("train");
        }
        c.vae_cfg = vae::SimVAEConfig::from_json(v);
    }
    if (j.contains("posterior_mean")) {
        nlohmann::json v = j["posterior_mean"];
        if (v.contains("train")) {
            check_keys(v["train"], {"steps", "batch_size", "lr"}, "posterior_mean.train");
            c.pm_train.steps = v["train"].value("steps", c.pm_train.steps);
            c.pm_train.batch_size = v["train"].value("batch_size", c.pm_train.batch_size);
            c.pm_train.lr = v["train"].value("lr", c.pm_train.lr);
            v.erase("train");
        }
        c.pm_cfg = pm::PmNetConfig::from_json(v);
    }
    if (j.contains("flow")) {
        nlohmann::json v = j["flow"];
        if (v.contains("train")) {
            check_keys(v["train"], {"steps", "batch_size", "lr", "beta1", "beta2", "clip_norm"},
                       "flow.train");
            c.flow_train.steps = v["train"].value("steps", c.flow_train.steps);
            c.flow_train.batch_size = v["train"].value("batch_size", c.flow_train.batch_size);
            c.flow_train.lr = v["train"].value("lr", c.flow_train.lr);
            c.flow_train.beta1 = v["train"].value("beta1", c.flow_train.beta1);
            c.flow_train.beta2 = v["train"].value("beta2", c.flow_train.beta2);
            c.flow_train.clip_norm = v["train"].value("clip_norm", c.flow_train.clip_norm);
            v.erase("train");
        }
        if (v.contains("space")) {
            c.flow_space = v["space"].get<std::string>();
            LPMRF_REQUIRE(c.flow_space == "latent" || c.flow_space == "pixel", ValidationError,
                          "flow.space must be latent|pixel");
            v.erase("space");
        }
        c.flow_cfg = flow::VelocityNetConfig::from_json(v);
    }
    if (j.contains("pipeline")) {
        check_keys(j["pipeline"], {"sampler_steps"}, "pipeline");
        c.sampler_steps = j["pipeline"].value("sampler_steps", c.sampler_steps);
        LPMRF_REQUIRE(c.sampler_steps >= 1, ValidationError, "pipeline.sampler_steps must be >= 1");
    }
    if (j.contains("metrics")) {
        check_keys(j["metrics"], {"feature_dim", "extractor_seed", "msssim_scales", "mmd_bandwidth"},
                   "metrics");
        c.metrics.feature_dim = j["metrics"].value("feature_dim", c.metrics.feature_dim);
        c.metrics.extractor_seed = j["metrics"].value("extractor_seed", c.metrics.extractor_seed);
        c.metrics.msssim_scales = j["metrics"].value("msssim_scales", c.metrics.msssim_scales);
        c.metrics.mmd_bandwidth = j["metrics"].value("mmd_bandwidth", c.metrics.mmd_bandwidth);
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream f(path);
    LPMRF_REQUIRE(f.good(), IoError, "config not found: ", path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("config parse error in " + path + ": " + e.what());
    }
    return from_json(j);
}

void RunConfig::apply_overrides(const std::vector<std::string>& specs) {
    if (specs.empty()) return;
    nlohmann::json j = to_json();
    for (const std::string& spec : specs) {
        const auto eq = spec.find('=');
        LPMRF_REQUIRE(eq != std::string::npos, ValidationError,
                      "override must be section.key=value, got ", spec);
        const std::string path = spec.substr(0, eq);
        const std::string value = spec.substr(eq + 1);

        nlohmann::json* node = &j;
        size_t start = 0;
        while (true) {
            const size_t dot = path.find('.', start);
            const std::string key =
                path.substr(start, dot == std::string::npos ? dot : dot - start);
            LPMRF_REQUIRE(!key.empty(), ValidationError, "bad override path: ", path);
            if (dot == std::string::npos) {
                nlohmann::json parsed;
                try {
                    parsed = nlohmann::json::parse(value);
                } catch (...) {
                    parsed = value;  // plain string
                }
                (*node)[key] = parsed;
                break;
            }
            LPMRF_REQUIRE(node->contains(key), ValidationError, "unknown override section: ", key);
            node = &(*node)[key];
            start = dot + 1;
        }
    }
    *this = from_json(j);
}

uint64_t RunConfig::stage_seed(const char* stage) const {
    uint64_t h = seed;
    for (const char* p = stage; *p; ++p) h = hash_combine(h, uint64_t(uint8_t(*p)));
    return h;
}

}  // namespace lpmrf::cli
