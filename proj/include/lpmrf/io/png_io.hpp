// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "lpmrf/core/image.hpp"

namespace lpmrf::io {

// 8-bit RGB PNG. Reading accepts gray / palette / alpha variants and converts
// to RGB; 16-bit inputs are reduced to 8.
void write_png(const std::string& path, const Image& image);
Image read_png(const std::string& path);

// Sorted .png paths directly inside `dir`.
std::vector<std::string> list_pngs(const std::string& dir);
std::vector<Image> load_image_dir(const std::string& dir);

// Horizontal strip of equally sized images with a 1-pixel separator, for
// qualitative sample grids.
Image image_grid(const std::vector<Image>& images, int columns);

}  // namespace lpmrf::io
