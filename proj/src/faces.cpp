// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#include "lpmrf/toy/faces.hpp"

#include <algorithm>
#include <cmath>

#include "lpmrf/core/rng.hpp"

namespace lpmrf::toy {

namespace {

constexpr int kSuper = 4;  // supersampling factor for soft edges

struct Rgb {
    double r, g, b;
};

Rgb random_color(Rng& rng, double lo, double hi) {
    return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

struct Canvas {
    int n;
    std::vector<double> r, g, b;

    explicit Canvas(int size) : n(size), r(size_t(size) * size), g(r.size()), b(r.size()) {}

    void blend(int x, int y, const Rgb& c, double alpha) {
        if (x < 0 || y < 0 || x >= n || y >= n || alpha <= 0.0) return;
        const size_t i = size_t(y) * n + x;
        r[i] = (1.0 - alpha) * r[i] + alpha * c.r;
        g[i] = (1.0 - alpha) * g[i] + alpha * c.g;
        b[i] = (1.0 - alpha) * b[i] + alpha * c.b;
    }

    // rotated-ellipse fill with a half-pixel soft edge
    void fill_ellipse(double cx, double cy, double ax, double ay, double angle, const Rgb& c) {
        const double ca = std::cos(angle), sa = std::sin(angle);
        const int x0 = std::max(0, int(cx - ax - ay - 2)), x1 = std::min(n - 1, int(cx + ax + ay + 2));
        const int y0 = std::max(0, int(cy - ax - ay - 2)), y1 = std::min(n - 1, int(cy + ax + ay + 2));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
                const double u = (dx * ca + dy * sa) / ax;
                const double v = (-dx * sa + dy * ca) / ay;
                const double d = u * u + v * v;
                const double alpha = std::clamp((1.0 - d) * 2.5 + 0.5, 0.0, 1.0);
                blend(x, y, c, alpha);
            }
    }

    void fill_disc(double cx, double cy, double rad, const Rgb& c) {
        fill_ellipse(cx, cy, rad, rad, 0.0, c);
    }
};

}  // namespace

Image toy_face(int size, uint64_t seed) {
    LPMRF_REQUIRE(size >= 8, ParamError, "toy_face: size must be >= 8, got ", size);
    Rng rng(seed, 0xface);
    const int big = size * kSuper;
    Canvas canvas(big);

    // background: vertical gradient between two colors
    const Rgb top = random_color(rng, 0.25, 0.95);
    const Rgb bot = random_color(rng, 0.25, 0.95);
    for (int y = 0; y < big; ++y) {
        const double t = double(y) / double(big - 1);
        const Rgb c{top.r + (bot.r - top.r) * t, top.g + (bot.g - top.g) * t,
                    top.b + (bot.b - top.b) * t};
        for (int x = 0; x < big; ++x) canvas.blend(x, y, c, 1.0);
    }

    // head
    const double cx = big * rng.uniform(0.44, 0.56);
    const double cy = big * rng.uniform(0.46, 0.56);
    const double ax = big * rng.uniform(0.26, 0.34);
    const double ay = big * rng.uniform(0.32, 0.42);
    const double tilt = rng.uniform(-0.12, 0.12);
    Rgb skin = random_color(rng, 0.35, 0.9);
    canvas.fill_ellipse(cx, cy, ax, ay, tilt, skin);

    // eyes
    const double eye_dx = ax * rng.uniform(0.38, 0.52);
    const double eye_dy = -ay * rng.uniform(0.12, 0.28);
    const double eye_r = big * rng.uniform(0.045, 0.065);
    const Rgb eye = random_color(rng, 0.12, 0.35);
    const double exl = cx - eye_dx, exr = cx + eye_dx, ey = cy + eye_dy;
    canvas.fill_disc(exl, ey, eye_r, eye);
    canvas.fill_disc(exr, ey, eye_r, eye);

    // mouth: quadratic arc drawn as overlapping discs
    const double mouth_y = cy + ay * rng.uniform(0.35, 0.55);
    const double mouth_w = ax * rng.uniform(0.5, 0.85);
    const double bend = big * rng.uniform(-0.04, 0.07);
    const double mouth_r = big * rng.uniform(0.02, 0.032);
    const Rgb mouth = {rng.uniform(0.4, 0.85), rng.uniform(0.0, 0.2), rng.uniform(0.1, 0.3)};
    for (int s = 0; s <= 24; ++s) {
        const double t = double(s) / 24.0 * 2.0 - 1.0;  // [-1, 1]
        const double mx = cx + t * mouth_w * 0.5;
        const double my = mouth_y + bend * (1.0 - t * t);
        canvas.fill_disc(mx, my, mouth_r, mouth);
    }

    // landmark dots: eye centers, mouth corners, nose tip
    const Rgb mark = random_color(rng, 0.7, 0.92);
    const double mark_r = big * 0.022;
    canvas.fill_disc(exl, ey, mark_r, mark);
    canvas.fill_disc(exr, ey, mark_r, mark);
    canvas.fill_disc(cx - mouth_w * 0.5, mouth_y, mark_r, mark);
    canvas.fill_disc(cx + mouth_w * 0.5, mouth_y, mark_r, mark);
    canvas.fill_disc(cx, cy + ay * 0.12, mark_r, mark);

    // box-filter downsample to target size
    Image img({3, size, size});
    const double inv = 1.0 / double(kSuper * kSuper);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double rr = 0.0, gg = 0.0, bb = 0.0;
            for (int sy = 0; sy < kSuper; ++sy)
                for (int sx = 0; sx < kSuper; ++sx) {
                    const size_t i = size_t(y * kSuper + sy) * big + size_t(x * kSuper + sx);
                    rr += canvas.r[i];
                    gg += canvas.g[i];
                    bb += canvas.b[i];
                }
            img.at(0, y, x) = float(std::clamp(rr * inv, 0.0, 1.0));
            img.at(1, y, x) = float(std::clamp(gg * inv, 0.0, 1.0));
            img.at(2, y, x) = float(std::clamp(bb * inv, 0.0, 1.0));
        }
    return img;
}

std::vector<Image> generate_corpus(int count, int size, uint64_t seed) {
    LPMRF_REQUIRE(count >= 1, ParamError, "generate_corpus: count must be >= 1");
    std::vector<Image> out;
    out.reserve(size_t(count));
    for (int i = 0; i < count; ++i) out.push_back(toy_face(size, hash_combine(seed, uint64_t(i))));
    return out;
}

}  // namespace lpmrf::toy
