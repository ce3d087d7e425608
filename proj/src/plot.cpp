// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#include "lpmrf/io/plot.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "lpmrf/io/png_io.hpp"

namespace lpmrf::io {

namespace {

// 5x7 column-major glyphs, bit 0 = top row. Text is uppercased before lookup.
struct Glyph {
    char ch;
    uint8_t col[5];
};

constexpr Glyph kFont[] = {
    {'0', {0x3E, 0x51, 0x49, 0x45, 0x3E}}, {'1', {0x00, 0x42, 0x7F, 0x40, 0x00}},
    {'2', {0x42, 0x61, 0x51, 0x49, 0x46}}, {'3', {0x21, 0x41, 0x45, 0x4B, 0x31}},
    {'4', {0x18, 0x14, 0x12, 0x7F, 0x10}}, {'5', {0x27, 0x45, 0x45, 0x45, 0x39}},
    {'6', {0x3C, 0x4A, 0x49, 0x49, 0x30}}, {'7', {0x01, 0x71, 0x09, 0x05, 0x03}},
    {'8', {0x36, 0x49, 0x49, 0x49, 0x36}}, {'9', {0x06, 0x49, 0x49, 0x29, 0x1E}},
    {'A', {0x7E, 0x11, 0x11, 0x11, 0x7E}}, {'B', {0x7F, 0x49, 0x49, 0x49, 0x36}},
    {'C', {0x3E, 0x41, 0x41, 0x41, 0x22}}, {'D', {0x7F, 0x41, 0x41, 0x22, 0x1C}},
    {'E', {0x7F, 0x49, 0x49, 0x49, 0x41}}, {'F', {0x7F, 0x09, 0x09, 0x09, 0x01}},
    {'G', {0x3E, 0x41, 0x49, 0x49, 0x7A}}, {'H', {0x7F, 0x08, 0x08, 0x08, 0x7F}},
    {'I', {0x00, 0x41, 0x7F, 0x41, 0x00}}, {'J', {0x20, 0x40, 0x41, 0x3F, 0x01}},
    {'K', {0x7F, 0x08, 0x14, 0x22, 0x41}}, {'L', {0x7F, 0x40, 0x40, 0x40, 0x40}},
    {'M', {0x7F, 0x02, 0x0C, 0x02, 0x7F}}, {'N', {0x7F, 0x04, 0x08, 0x10, 0x7F}},
    {'O', {0x3E, 0x41, 0x41, 0x41, 0x3E}}, {'P', {0x7F, 0x09, 0x09, 0x09, 0x06}},
    {'Q', {0x3E, 0x41, 0x51, 0x21, 0x5E}}, {'R', {0x7F, 0x09, 0x19, 0x29, 0x46}},
    {'S', {0x46, 0x49, 0x49, 0x49, 0x31}}, {'T', {0x01, 0x01, 0x7F, 0x01, 0x01}},
    {'U', {0x3F, 0x40, 0x40, 0x40, 0x3F}}, {'V', {0x1F, 0x20, 0x40, 0x20, 0x1F}},
    {'W', {0x3F, 0x40, 0x38, 0x40, 0x3F}}, {'X', {0x63, 0x14, 0x08, 0x14, 0x63}},
    {'Y', {0x07, 0x08, 0x70, 0x08, 0x07}}, {'Z', {0x61, 0x51, 0x49, 0x45, 0x43}},
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00}}, {'.', {0x00, 0x60, 0x60, 0x00, 0x00}},
    {'-', {0x08, 0x08, 0x08, 0x08, 0x08}}, {'+', {0x08, 0x08, 0x3E, 0x08, 0x08}},
    {':', {0x00, 0x36, 0x36, 0x00, 0x00}}, {',', {0x00, 0x50, 0x30, 0x00, 0x00}},
    {'%', {0x23, 0x13, 0x08, 0x64, 0x62}}, {'(', {0x00, 0x1C, 0x22, 0x41, 0x00}},
    {')', {0x00, 0x41, 0x22, 0x1C, 0x00}}, {'/', {0x20, 0x10, 0x08, 0x04, 0x02}},
    {'_', {0x40, 0x40, 0x40, 0x40, 0x40}}, {'=', {0x14, 0x14, 0x14, 0x14, 0x14}},
};

const uint8_t* glyph_for(char c) {
    c = char(std::toupper(static_cast<unsigned char>(c)));
    for (const auto& g : kFont)
        if (g.ch == c) return g.col;
    return kFont[36].col;  // space
}

struct Raster {
    int w, h;
    Image img;
    Raster(int width, int height) : w(width), h(height), img(Image::full({3, height, width}, 1.0f)) {}

    void set(int x, int y, float r, float g, float b) {
        if (x < 0 || y < 0 || x >= w || y >= h) return;
        img.at(0, y, x) = r;
        img.at(1, y, x) = g;
        img.at(2, y, x) = b;
    }

    void line(double x0, double y0, double x1, double y1, float r, float g, float b) {
        const double dx = x1 - x0, dy = y1 - y0;
        const int steps = std::max(1, int(std::ceil(std::max(std::abs(dx), std::abs(dy)))));
        for (int s = 0; s <= steps; ++s) {
            const double t = double(s) / steps;
            const int x = int(std::lround(x0 + dx * t));
            const int y = int(std::lround(y0 + dy * t));
            set(x, y, r, g, b);
            set(x + 1, y, r, g, b);  // 2px stroke
        }
    }

    void text(int x, int y, const std::string& s, float r = 0.1f, float g = 0.1f, float b = 0.1f) {
        int cx = x;
        for (char ch : s) {
            const uint8_t* cols = glyph_for(ch);
            for (int col = 0; col < 5; ++col)
                for (int row = 0; row < 7; ++row)
                    if (cols[col] >> row & 1) set(cx + col, y + row, r, g, b);
            cx += 6;
        }
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

void write_line_plot(const std::string& path, const std::string& title,
                     const std::vector<Series>& series, bool log_y, int width, int height) {
    LPMRF_REQUIRE(!series.empty(), ParamError, "write_line_plot: no series");
    Raster canvas(width, height);
    const int ml = 64, mr = 14, mt = 26, mb = 34;
    const int px0 = ml, px1 = width - mr, py0 = mt, py1 = height - mb;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        LPMRF_REQUIRE(s.x.size() == s.y.size(), ParamError, "write_line_plot: x/y size mismatch");
        for (size_t i = 0; i < s.x.size(); ++i) {
            double yv = s.y[i];
            if (log_y && yv <= 0.0) continue;
            if (log_y) yv = std::log10(yv);
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, yv);
            ymax = std::max(ymax, yv);
        }
    }
    if (xmin > xmax) {
        xmin = 0.0;
        xmax = 1.0;
    }
    if (ymin > ymax) {
        ymin = 0.0;
        ymax = 1.0;
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;

    auto sx = [&](double x) { return px0 + (x - xmin) / (xmax - xmin) * (px1 - px0); };
    auto sy = [&](double y) {
        const double v = log_y ? std::log10(std::max(y, 1e-300)) : y;
        return py1 - (v - ymin) / (ymax - ymin) * (py1 - py0);
    };

    // axes and ticks
    canvas.line(px0, py0, px0, py1, 0.1f, 0.1f, 0.1f);
    canvas.line(px0, py1, px1, py1, 0.1f, 0.1f, 0.1f);
    for (int tck = 0; tck <= 4; ++tck) {
        const double fx = xmin + (xmax - xmin) * tck / 4.0;
        const double fy = ymin + (ymax - ymin) * tck / 4.0;
        const int tx = int(sx(fx));
        const int ty = int(py1 - (py1 - py0) * tck / 4.0);
        canvas.line(tx, py1, tx, py1 + 4, 0.1f, 0.1f, 0.1f);
        canvas.text(tx - 12, py1 + 8, fmt(fx));
        canvas.line(px0 - 4, ty, px0, ty, 0.1f, 0.1f, 0.1f);
        canvas.text(4, ty - 3, fmt(log_y ? std::pow(10.0, fy) : fy));
        // light gridline
        for (int gx = px0; gx <= px1; gx += 4) canvas.set(gx, ty, 0.88f, 0.88f, 0.88f);
    }

    for (const auto& s : series) {
        for (size_t i = 1; i < s.x.size(); ++i) {
            if (log_y && (s.y[i - 1] <= 0.0 || s.y[i] <= 0.0)) continue;
            canvas.line(sx(s.x[i - 1]), sy(s.y[i - 1]), sx(s.x[i]), sy(s.y[i]), s.r, s.g, s.b);
        }
    }

    canvas.text(px0, 8, title);
    int ly = py0 + 6;
    for (const auto& s : series) {
        for (int dx = 0; dx < 14; ++dx)
            for (int dy = 0; dy < 3; ++dy) canvas.set(px0 + 8 + dx, ly + 2 + dy, s.r, s.g, s.b);
        canvas.text(px0 + 26, ly, s.label);
        ly += 12;
    }

    write_png(path, canvas.img);
}

}  // namespace lpmrf::io
