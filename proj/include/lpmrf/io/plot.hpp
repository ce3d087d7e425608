// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "lpmrf/core/image.hpp"

namespace lpmrf::io {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    float r = 0.8f, g = 0.2f, b = 0.2f;
};

// Minimal line-plot renderer (axes, ticks, legend, 5x7 bitmap labels) written
// straight to a PNG. Log-scale y is useful for loss/metric curves.
void write_line_plot(const std::string& path, const std::string& title,
                     const std::vector<Series>& series, bool log_y = false, int width = 720,
                     int height = 480);

}  // namespace lpmrf::io
