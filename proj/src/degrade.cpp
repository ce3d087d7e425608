// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#include "lpmrf/degrade/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <vector>

#include <jpeglib.h>

namespace lpmrf::degradation {

namespace {

// Mirror index into [0, n) without repeating the border sample.
int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = std::abs(i) % period;
    return i < n ? i : period - i;
}

std::vector<double> gaussian_kernel(double sigma, int ksize) {
    std::vector<double> k(size_t(ksize), 0.0);
    const int r = ksize / 2;
    double sum = 0.0;
    for (int i = 0; i < ksize; ++i) {
        const double d = double(i - r);
        k[size_t(i)] = std::exp(-0.5 * d * d / (sigma * sigma));
        sum += k[size_t(i)];
    }
    for (auto& v : k) v /= sum;
    return k;
}

// Catmull-Rom weights for the four taps around t in [0,1).
void bicubic_weights(double t, double w[4]) {
    constexpr double a = -0.5;
    const double t2 = t * t, t3 = t2 * t;
    w[0] = a * (t3 - 2.0 * t2 + t);
    w[1] = (a + 2.0) * t3 - (a + 3.0) * t2 + 1.0;
    w[2] = -(a + 2.0) * t3 + (2.0 * a + 3.0) * t2 - a * t;
    w[3] = a * (t2 - t3);
}

// Separable bicubic resize of one plane with edge clamping; weights are
// renormalized so constants are preserved exactly.
void resize_axis(const std::vector<float>& in, int in_len, int lines, int stride_elem,
                 int stride_line, std::vector<float>& out, int out_len) {
    const double scale = double(in_len) / double(out_len);
    for (int o = 0; o < out_len; ++o) {
        const double src = (double(o) + 0.5) * scale - 0.5;
        const int base = int(std::floor(src));
        double w[4];
        bicubic_weights(src - double(base), w);
        const double wsum = w[0] + w[1] + w[2] + w[3];
        int idx[4];
        for (int k = 0; k < 4; ++k) idx[k] = std::clamp(base - 1 + k, 0, in_len - 1);
        for (int l = 0; l < lines; ++l) {
            double acc = 0.0;
            for (int k = 0; k < 4; ++k)
                acc += w[k] * double(in[size_t(l * stride_line + idx[k] * stride_elem)]);
            out[size_t(l * out_len + o)] = float(acc / wsum);
        }
    }
}

struct JpegErrorTrap {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* trap = reinterpret_cast<JpegErrorTrap*>(cinfo->err);
    std::longjmp(trap->jump, 1);
}

}  // namespace

int kernel_size_for_sigma(double sigma) {
    const int k = 2 * int(std::ceil(3.0 * sigma)) + 1;
    return std::max(k, 1);
}

void DegradationParams::validate() const {
    LPMRF_REQUIRE(blur_sigma > 0.0, ParamError, "blur_sigma must be > 0, got ", blur_sigma);
    LPMRF_REQUIRE(blur_kernel_size % 2 == 1, ParamError, "blur_kernel_size must be odd, got ",
                  blur_kernel_size);
    LPMRF_REQUIRE(blur_kernel_size >= kernel_size_for_sigma(blur_sigma) || blur_kernel_size == 1,
                  ParamError, "blur_kernel_size ", blur_kernel_size,
                  " truncates sigma ", blur_sigma, "; need >= ", kernel_size_for_sigma(blur_sigma));
    LPMRF_REQUIRE(scale_factor >= 1.0, ParamError, "scale_factor must be >= 1, got ", scale_factor);
    LPMRF_REQUIRE(noise_sigma >= 0.0, ParamError, "noise_sigma must be >= 0, got ", noise_sigma);
    if (jpeg_quality)
        LPMRF_REQUIRE(*jpeg_quality >= 1 && *jpeg_quality <= 100, ParamError,
                      "jpeg_quality must be in [1,100], got ", *jpeg_quality);
}

nlohmann::json DegradationParams::to_json() const {
    nlohmann::json j;
    j["blur_sigma"] = blur_sigma;
    j["blur_kernel_size"] = blur_kernel_size;
    j["scale_factor"] = scale_factor;
    j["noise_sigma"] = noise_sigma;
    if (jpeg_quality)
        j["jpeg_quality"] = *jpeg_quality;
    else
        j["jpeg_quality"] = "none";
    j["seed"] = seed;
    return j;
}

DegradationParams DegradationParams::from_json(const nlohmann::json& j) {
    static const char* known[] = {"blur_sigma", "blur_kernel_size", "scale_factor",
                                  "noise_sigma", "jpeg_quality",    "seed"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok |= (it.key() == k);
        LPMRF_REQUIRE(ok, ValidationError, "unknown degradation key: ", it.key());
    }
    DegradationParams p;
    p.blur_sigma = j.value("blur_sigma", p.blur_sigma);
    p.blur_kernel_size = j.value("blur_kernel_size", p.blur_kernel_size);
    p.scale_factor = j.value("scale_factor", p.scale_factor);
    p.noise_sigma = j.value("noise_sigma", p.noise_sigma);
    if (j.contains("jpeg_quality")) {
        if (j["jpeg_quality"].is_string()) {
            LPMRF_REQUIRE(j["jpeg_quality"] == "none", ValidationError,
                          "jpeg_quality must be an integer or \"none\"");
            p.jpeg_quality.reset();
        } else {
            p.jpeg_quality = j["jpeg_quality"].get<int>();
        }
    }
    p.seed = j.value("seed", uint64_t(0));
    p.validate();
    return p;
}

DegradationParams DegradationRanges::sample(Rng& rng, uint64_t sample_seed) const {
    DegradationParams p;
    p.blur_sigma = rng.uniform(blur_sigma_min, blur_sigma_max);
    p.blur_kernel_size = kernel_size_for_sigma(p.blur_sigma);
    p.scale_factor = rng.uniform(scale_factor_min, scale_factor_max);
    p.noise_sigma = rng.uniform(noise_sigma_min, noise_sigma_max);
    if (jpeg_quality)
        p.jpeg_quality = int(rng.uniform_int(jpeg_quality->first, jpeg_quality->second));
    p.seed = sample_seed;
    return p;
}

nlohmann::json DegradationRanges::to_json() const {
    nlohmann::json j;
    j["blur_sigma"] = {blur_sigma_min, blur_sigma_max};
    j["scale_factor"] = {scale_factor_min, scale_factor_max};
    j["noise_sigma"] = {noise_sigma_min, noise_sigma_max};
    if (jpeg_quality)
        j["jpeg_quality"] = {jpeg_quality->first, jpeg_quality->second};
    else
        j["jpeg_quality"] = "none";
    return j;
}

DegradationRanges DegradationRanges::from_json(const nlohmann::json& j) {
    static const char* known[] = {"blur_sigma", "scale_factor", "noise_sigma", "jpeg_quality"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok |= (it.key() == k);
        LPMRF_REQUIRE(ok, ValidationError, "unknown degradation key: ", it.key());
    }
    DegradationRanges r;
    auto pair = [&](const char* key, double& lo, double& hi) {
        if (!j.contains(key)) return;
        lo = j[key].at(0).get<double>();
        hi = j[key].at(1).get<double>();
        LPMRF_REQUIRE(lo <= hi, ValidationError, "degradation range ", key, " has lo > hi");
    };
    pair("blur_sigma", r.blur_sigma_min, r.blur_sigma_max);
    pair("scale_factor", r.scale_factor_min, r.scale_factor_max);
    pair("noise_sigma", r.noise_sigma_min, r.noise_sigma_max);
    if (j.contains("jpeg_quality")) {
        if (j["jpeg_quality"].is_string()) {
            LPMRF_REQUIRE(j["jpeg_quality"] == "none", ValidationError,
                          "jpeg_quality must be [lo,hi] or \"none\"");
            r.jpeg_quality.reset();
        } else {
            r.jpeg_quality = {j["jpeg_quality"].at(0).get<int>(), j["jpeg_quality"].at(1).get<int>()};
        }
    }
    return r;
}

Image gaussian_blur(const Image& image, double sigma, int kernel_size) {
    require_image(image, "gaussian_blur");
    LPMRF_REQUIRE(sigma > 0.0, ParamError, "gaussian_blur: sigma must be > 0, got ", sigma);
    LPMRF_REQUIRE(kernel_size >= 1 && kernel_size % 2 == 1, ParamError,
                  "gaussian_blur: kernel_size must be odd and positive, got ", kernel_size);
    if (kernel_size == 1) return image;

    const std::vector<double> k = gaussian_kernel(sigma, kernel_size);
    const int h = image.dim(1), w = image.dim(2), r = kernel_size / 2;
    Image tmp(image.shape());
    Image out(image.shape());
    for (int c = 0; c < 3; ++c) {
        // horizontal pass
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int t = -r; t <= r; ++t)
                    acc += k[size_t(t + r)] * double(image.at(c, y, reflect_index(x + t, w)));
                tmp.at(c, y, x) = float(acc);
            }
        }
        // vertical pass
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int t = -r; t <= r; ++t)
                    acc += k[size_t(t + r)] * double(tmp.at(c, reflect_index(y + t, h), x));
                out.at(c, y, x) = float(acc);
            }
        }
    }
    out.clamp_(0.0f, 1.0f);
    return out;
}

Image resample_to(const Image& image, int out_h, int out_w) {
    require_image(image, "resample");
    LPMRF_REQUIRE(out_h >= 1 && out_w >= 1, ParamError, "resample: zero-size output ", out_h, "x",
                  out_w);
    const int h = image.dim(1), w = image.dim(2);
    if (out_h == h && out_w == w) return image;

    Image out({3, out_h, out_w});
    for (int c = 0; c < 3; ++c) {
        // rows first (resize along x), then columns
        std::vector<float> plane(size_t(h) * w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) plane[size_t(y) * w + x] = image.at(c, y, x);
        std::vector<float> mid(size_t(h) * out_w);
        resize_axis(plane, w, h, 1, w, mid, out_w);
        // transpose-free column pass: operate with strides
        std::vector<float> midT(size_t(out_w) * h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < out_w; ++x) midT[size_t(x) * h + y] = mid[size_t(y) * out_w + x];
        std::vector<float> outT(size_t(out_w) * out_h);
        resize_axis(midT, h, out_w, 1, h, outT, out_h);
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x) out.at(c, y, x) = outT[size_t(x) * out_h + y];
    }
    out.clamp_(0.0f, 1.0f);
    return out;
}

Image resample(const Image& image, double factor, ResampleDir dir) {
    require_image(image, "resample");
    LPMRF_REQUIRE(factor >= 1.0, ParamError, "resample: factor must be >= 1, got ", factor);
    const int h = image.dim(1), w = image.dim(2);
    int oh, ow;
    if (dir == ResampleDir::Down) {
        oh = int(std::lround(double(h) / factor));
        ow = int(std::lround(double(w) / factor));
    } else {
        oh = int(std::lround(double(h) * factor));
        ow = int(std::lround(double(w) * factor));
    }
    LPMRF_REQUIRE(oh >= 1 && ow >= 1, ParamError, "resample: factor ", factor,
                  " produces zero-size output from ", h, "x", w);
    return resample_to(image, oh, ow);
}

Image add_gaussian_noise(const Image& image, double sigma, Rng& rng) {
    require_image(image, "add_gaussian_noise");
    LPMRF_REQUIRE(sigma >= 0.0, ParamError, "add_gaussian_noise: sigma must be >= 0, got ", sigma);
    if (sigma == 0.0) return image;
    Image out = image;
    for (int64_t i = 0; i < out.numel(); ++i) out[i] = float(double(out[i]) + sigma * rng.normal());
    out.clamp_(0.0f, 1.0f);
    return out;
}

Image jpeg_compress(const Image& image, int quality) {
    require_image(image, "jpeg_compress");
    LPMRF_REQUIRE(quality >= 1 && quality <= 100, ParamError,
                  "jpeg_compress: quality must be in [1,100], got ", quality);
    const int h = image.dim(1), w = image.dim(2);

    // 8-bit interleaved RGB input, as a real codec sees it.
    std::vector<uint8_t> rgb(size_t(3) * h * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                rgb[(size_t(y) * w + x) * 3 + c] = to_u8(image.at(c, y, x));

    JpegErrorTrap trap;
    unsigned char* buf = nullptr;
    unsigned long buf_size = 0;

    {
        jpeg_compress_struct cinfo;
        cinfo.err = jpeg_std_error(&trap.mgr);
        trap.mgr.error_exit = jpeg_error_exit;
        if (setjmp(trap.jump)) {
            jpeg_destroy_compress(&cinfo);
            if (buf) free(buf);
            throw NumericError("jpeg encode failed");
        }
        jpeg_create_compress(&cinfo);
        jpeg_mem_dest(&cinfo, &buf, &buf_size);
        cinfo.image_width = JDIMENSION(w);
        cinfo.image_height = JDIMENSION(h);
        cinfo.input_components = 3;
        cinfo.in_color_space = JCS_RGB;
        jpeg_set_defaults(&cinfo);
        jpeg_set_quality(&cinfo, quality, TRUE);
        jpeg_start_compress(&cinfo, TRUE);
        while (cinfo.next_scanline < cinfo.image_height) {
            JSAMPROW row = rgb.data() + size_t(cinfo.next_scanline) * w * 3;
            jpeg_write_scanlines(&cinfo, &row, 1);
        }
        jpeg_finish_compress(&cinfo);
        jpeg_destroy_compress(&cinfo);
    }

    Image out({3, h, w});
    {
        jpeg_decompress_struct dinfo;
        dinfo.err = jpeg_std_error(&trap.mgr);
        trap.mgr.error_exit = jpeg_error_exit;
        if (setjmp(trap.jump)) {
            jpeg_destroy_decompress(&dinfo);
            free(buf);
            throw NumericError("jpeg decode failed");
        }
        jpeg_create_decompress(&dinfo);
        jpeg_mem_src(&dinfo, buf, buf_size);
        jpeg_read_header(&dinfo, TRUE);
        dinfo.out_color_space = JCS_RGB;
        jpeg_start_decompress(&dinfo);
        std::vector<uint8_t> row(size_t(w) * 3);
        int y = 0;
        while (dinfo.output_scanline < dinfo.output_height) {
            JSAMPROW rp = row.data();
            jpeg_read_scanlines(&dinfo, &rp, 1);
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c)
                    out.at(c, y, x) = float(row[size_t(x) * 3 + c]) / 255.0f;
            ++y;
        }
        jpeg_finish_decompress(&dinfo);
        jpeg_destroy_decompress(&dinfo);
        free(buf);
    }
    return out;
}

Image degrade(const Image& image, const DegradationParams& params) {
    require_image(image, "degrade");
    params.validate();
    const int h = image.dim(1), w = image.dim(2);
    Rng rng(params.seed);

    Image y = gaussian_blur(image, params.blur_sigma, params.blur_kernel_size);
    y = resample(y, params.scale_factor, ResampleDir::Down);
    y = add_gaussian_noise(y, params.noise_sigma, rng);
    if (params.jpeg_quality) y = jpeg_compress(y, *params.jpeg_quality);
    return resample_to(y, h, w);
}

}  // namespace lpmrf::degradation
