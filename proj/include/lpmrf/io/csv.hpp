// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "lpmrf/core/error.hpp"

namespace lpmrf::io {

// Fixed-column CSV with %.10g values; column order is part of the documented
// artifact contract.
inline void write_csv(const std::string& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream f(path);
    LPMRF_REQUIRE(f.good(), IoError, "cannot open for writing: ", path);
    for (size_t i = 0; i < columns.size(); ++i) f << (i ? "," : "") << columns[i];
    f << "\n";
    char buf[40];
    for (const auto& row : rows) {
        LPMRF_REQUIRE(row.size() == columns.size(), ParamError, "csv row width mismatch");
        for (size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.10g", row[i]);
            f << (i ? "," : "") << buf;
        }
        f << "\n";
    }
    LPMRF_REQUIRE(f.good(), IoError, "short write: ", path);
}

}  // namespace lpmrf::io
