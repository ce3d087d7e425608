// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace lpmrf::cli {

// Single entry point for all subcommands. Returns the process exit status;
// failures emit a machine-readable JSON error record on stderr.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace lpmrf::cli
