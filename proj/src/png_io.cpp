// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#include "lpmrf/io/png_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include <png.h>

namespace lpmrf::io {

namespace {

struct FileCloser {
    FILE* f = nullptr;
    ~FileCloser() {
        if (f) std::fclose(f);
    }
};

}  // namespace

void write_png(const std::string& path, const Image& image) {
    require_image(image, "write_png");
    const int h = image.dim(1), w = image.dim(2);

    FileCloser fc{std::fopen(path.c_str(), "wb")};
    LPMRF_REQUIRE(fc.f != nullptr, IoError, "cannot open for writing: ", path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    LPMRF_REQUIRE(png != nullptr, IoError, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png write failed: " + path);
    }
    png_init_io(png, fc.f);
    png_set_IHDR(png, info, png_uint_32(w), png_uint_32(h), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<uint8_t> row(size_t(w) * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) row[size_t(x) * 3 + c] = to_u8(image.at(c, y, x));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image read_png(const std::string& path) {
    FileCloser fc{std::fopen(path.c_str(), "rb")};
    LPMRF_REQUIRE(fc.f != nullptr, IoError, "cannot open for reading: ", path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    LPMRF_REQUIRE(png != nullptr, IoError, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("png read failed: " + path);
    }
    png_init_io(png, fc.f);
    png_read_info(png, info);

    png_set_expand(png);                 // palette / low-bit gray -> 8-bit
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int w = int(png_get_image_width(png, info));
    const int h = int(png_get_image_height(png, info));
    LPMRF_REQUIRE(png_get_channels(png, info) == 3, IoError, path,
                  ": unsupported channel layout after conversion");

    Image img({3, h, w});
    std::vector<uint8_t> row(size_t(w) * 3);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(c, y, x) = float(row[size_t(x) * 3 + c]) / 255.0f;
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

std::vector<std::string> list_pngs(const std::string& dir) {
    namespace fs = std::filesystem;
    LPMRF_REQUIRE(fs::is_directory(dir), IoError, "not a directory: ", dir);
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Image> load_image_dir(const std::string& dir) {
    std::vector<Image> out;
    for (const auto& p : list_pngs(dir)) out.push_back(read_png(p));
    LPMRF_REQUIRE(!out.empty(), IoError, "no .png files in ", dir);
    return out;
}

Image image_grid(const std::vector<Image>& images, int columns) {
    LPMRF_REQUIRE(!images.empty() && columns >= 1, ParamError, "image_grid: empty input");
    const int h = images[0].dim(1), w = images[0].dim(2);
    const int rows = (int(images.size()) + columns - 1) / columns;
    Image grid = Image::full({3, rows * (h + 1) - 1, columns * (w + 1) - 1}, 1.0f);
    for (size_t i = 0; i < images.size(); ++i) {
        LPMRF_REQUIRE(images[i].dim(1) == h && images[i].dim(2) == w, ShapeError,
                      "image_grid: inconsistent sizes");
        const int r = int(i) / columns, col = int(i) % columns;
        for (int c = 0; c < 3; ++c)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    grid.at(c, r * (h + 1) + y, col * (w + 1) + x) = images[i].at(c, y, x);
    }
    return grid;
}

}  // namespace lpmrf::io
