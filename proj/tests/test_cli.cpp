// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lpmrf/cli/cli.hpp"
#include "lpmrf/cli/config.hpp"
#include "lpmrf/io/png_io.hpp"

using namespace lpmrf;
using namespace lpmrf::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& sub = "") const { return (path / sub).string(); }
};

std::vector<std::string> tiny_corpus_args(const std::string& out) {
    return {"gen-data", "--out", out,           "--seed",
            "5",        "--set", "data.n_train=6", "--set",
            "data.n_test=4", "--set", "data.image_size=16"};
}

}  // namespace

TEST_CASE("run config: json round trip, unknown keys, overrides") {
    RunConfig cfg;
    RunConfig back = RunConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());

    nlohmann::json j = cfg.to_json();
    j["telemetry"] = true;
    CHECK_THROWS_AS(RunConfig::from_json(j), ValidationError);

    nlohmann::json j2 = cfg.to_json();
    j2["flow"]["train"]["momentum"] = 0.9;
    CHECK_THROWS_AS(RunConfig::from_json(j2), ValidationError);

    cfg.apply_override("vae.train.steps=123");
    CHECK(cfg.vae_train.steps == 123);
    cfg.apply_override("flow.space=pixel");
    CHECK(cfg.flow_space == "pixel");
    cfg.apply_overrides({"vae.channel_multipliers=[1,2]", "vae.downsample_factor=2"});
    CHECK(cfg.vae_cfg.downsample_factor == 2);
    CHECK_THROWS_AS(cfg.apply_override("nosuch.key=1"), ValidationError);
    CHECK_THROWS_AS(cfg.apply_override("vae.train.steps"), ValidationError);

    // stage seeds differ per stage and follow the global seed
    cfg.seed = 9;
    CHECK(cfg.stage_seed("vae-train") != cfg.stage_seed("pm-train"));
    RunConfig other = cfg;
    other.seed = 10;
    CHECK(cfg.stage_seed("vae-train") != other.stage_seed("vae-train"));
}

TEST_CASE("gen-data is deterministic: identical bytes on rerun") {
    TempDir a("lpmrf_cli_gen_a"), b("lpmrf_cli_gen_b");
    CHECK(run(tiny_corpus_args(a.str())) == 0);
    CHECK(run(tiny_corpus_args(b.str())) == 0);

    const auto pngs_a = io::list_pngs(a.str("train"));
    const auto pngs_b = io::list_pngs(b.str("train"));
    REQUIRE(pngs_a.size() == 6);
    REQUIRE(pngs_b.size() == 6);
    for (size_t i = 0; i < pngs_a.size(); ++i) CHECK(slurp(pngs_a[i]) == slurp(pngs_b[i]));
    CHECK(slurp(a.str("manifest.json")) == slurp(b.str("manifest.json")));
    CHECK(fs::exists(a.str("config.snapshot.json")));
}

TEST_CASE("missing checkpoint yields a dependency error exit") {
    TempDir dir("lpmrf_cli_dep");
    CHECK(run(tiny_corpus_args(dir.str("corpus"))) == 0);
    const int rc = run({"train-flow", "--data", dir.str("corpus"), "--pm",
                        dir.str("absent.ckpt"), "--space", "pixel", "--out",
                        dir.str("flow.ckpt")});
    CHECK(rc == 1);
}

TEST_CASE("restore requires a valid bundle") {
    TempDir dir("lpmrf_cli_bundle");
    const int rc = run({"restore", "--system", dir.str("missing.bundle.json"), "--in",
                        dir.str(), "--out", dir.str("out")});
    CHECK(rc == 1);
}

TEST_CASE("option-gap report shows zero gap2 for the identity preset") {
    TempDir dir("lpmrf_cli_gap");
    const std::string report = dir.str("gaps.json");
    CHECK(run({"option-gap", "--preset", "identity", "--out", report}) == 0);
    const nlohmann::json j = nlohmann::json::parse(slurp(report));
    CHECK(j["presets"]["identity"]["gap2"] == 0.0);
    CHECK(j["presets"]["identity"]["gap1"] == 0.0);
}

TEST_CASE("evaluate validates its metric list and pairing requirements") {
    TempDir dir("lpmrf_cli_eval");
    CHECK(run(tiny_corpus_args(dir.str("corpus"))) == 0);

    // mismatched counts for a paired metric
    int rc = run({"evaluate", "--pred", dir.str("corpus/train"), "--ref", dir.str("corpus/test"),
                  "--metrics", "psnr", "--out", dir.str("r.json")});
    CHECK(rc == 1);

    rc = run({"evaluate", "--pred", dir.str("corpus/test"), "--ref", dir.str("corpus/test"),
              "--metrics", "warmth", "--out", dir.str("r.json")});
    CHECK(rc == 1);

    // indrmse without a proxy directory is a dependency error
    rc = run({"evaluate", "--pred", dir.str("corpus/test"), "--ref", dir.str("corpus/test"),
              "--metrics", "indrmse", "--out", dir.str("r.json")});
    CHECK(rc == 1);

    rc = run({"evaluate", "--pred", dir.str("corpus/test"), "--ref", dir.str("corpus/test"),
              "--metrics", "psnr,fd", "--out", dir.str("r.json")});
    CHECK(rc == 0);
    const nlohmann::json j = nlohmann::json::parse(slurp(dir.str("r.json")));
    CHECK(j["metrics"]["psnr_mean"] == 100.0);
    CHECK(double(j["metrics"]["fd"]) < 1e-8);
    CHECK(j["meta"]["extractor_id"] == "randconv-v1-s1234-d64");
    CHECK(fs::exists(dir.str("r.json.extractor.ckpt")));
}

TEST_CASE("evaluate reports are byte-identical across reruns") {
    TempDir dir("lpmrf_cli_repro");
    CHECK(run(tiny_corpus_args(dir.str("corpus"))) == 0);
    auto eval = [&](const std::string& out) {
        return run({"evaluate", "--pred", dir.str("corpus/test"), "--ref", dir.str("corpus/test"),
                    "--metrics", "psnr,fd,mmd", "--seed", "3", "--out", dir.str(out)});
    };
    CHECK(eval("a.json") == 0);
    CHECK(eval("b.json") == 0);
    CHECK(slurp(dir.str("a.json")) == slurp(dir.str("b.json")));
}

TEST_CASE("convergence command emits curves, plot, and a speedup summary") {
    TempDir dir("lpmrf_cli_conv");
    REQUIRE(run({"gen-data", "--out", dir.str("corpus"), "--seed", "3", "--set",
                 "data.n_train=8", "--set", "data.n_test=6", "--set", "data.image_size=16"}) == 0);
    const int rc = run(
        {"convergence", "--data", dir.str("corpus"), "--out", dir.str("conv"), "--seed", "3",
         "--set", "vae.base_channels=8", "--set", "vae.channel_multipliers=[1,2]",
         "--set", "vae.latent_channels=8", "--set", "vae.downsample_factor=2",
         "--set", "vae.train.steps=30", "--set", "vae.train.batch_size=2",
         "--set", "vae.train.warmup_steps=5",
         "--set", "posterior_mean.base_channels=8",
         "--set", "posterior_mean.channel_multipliers=[1,2]",
         "--set", "posterior_mean.train.steps=20", "--set", "posterior_mean.train.batch_size=2",
         "--set", "flow.base_channels=8", "--set", "flow.channel_multipliers=[1,2]",
         "--set", "flow.train.steps=20", "--set", "flow.train.batch_size=2",
         "--set", "validation_interval=10"});
    REQUIRE(rc == 0);
    CHECK(fs::exists(dir.str("conv/pixel_curve.csv")));
    CHECK(fs::exists(dir.str("conv/latent_curve.csv")));
    CHECK(fs::exists(dir.str("conv/convergence_fd.png")));
    CHECK(fs::exists(dir.str("conv/config.snapshot.json")));
    const nlohmann::json report = nlohmann::json::parse(slurp(dir.str("conv/report.json")));
    CHECK(report.contains("speedup_ratio"));
    CHECK(report["pixel_steps"] == report["latent_steps"]);  // equal-compute bookkeeping
    CHECK(report.contains("reference_speedup_fid"));
}

TEST_CASE("degradation config file flag feeds the sampler ranges") {
    TempDir dir("lpmrf_cli_degr");
    {
        std::ofstream f(dir.str("degr.json"));
        f << R"({"degradation": {"blur_sigma": [0.5, 0.5], "scale_factor": [1.0, 1.0],)"
          << R"( "noise_sigma": [0.0, 0.0], "jpeg_quality": "none"}})";
    }
    RunConfig cfg;
    std::ifstream f(dir.str("degr.json"));
    nlohmann::json j = nlohmann::json::parse(f);
    cfg.degr = degradation::DegradationRanges::from_json(j["degradation"]);
    CHECK(cfg.degr.blur_sigma_min == 0.5);
    CHECK(!cfg.degr.jpeg_quality);
}
