// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#include "lpmrf/cli/cli.hpp"

int main(int argc, char** argv) {
    return lpmrf::cli::run(argc, argv);
}
