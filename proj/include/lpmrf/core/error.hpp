// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace lpmrf {

// Error taxonomy. Every failure surfaced to the CLI maps to one of these,
// so exit paths can emit a machine-readable record with a stable "type".
class Error : public std::runtime_error {
public:
    Error(std::string type, const std::string& message)
        : std::runtime_error(message), type_(std::move(type)) {}
    const std::string& type() const noexcept { return type_; }

private:
    std::string type_;
};

struct ParamError : Error {
    explicit ParamError(const std::string& m) : Error("parameter", m) {}
};
struct ShapeError : Error {
    explicit ShapeError(const std::string& m) : Error("shape", m) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("configuration", m) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& m) : Error("numeric", m) {}
};
struct DependencyError : Error {
    explicit DependencyError(const std::string& m) : Error("dependency", m) {}
};
struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error("validation", m) {}
};
struct IoError : Error {
    explicit IoError(const std::string& m) : Error("io", m) {}
};

namespace detail {
template <class E, class... Args>
[[noreturn]] void raise(Args&&... args) {
    std::ostringstream os;
    (os << ... << args);
    throw E(os.str());
}
}  // namespace detail

}  // namespace lpmrf

#define LPMRF_REQUIRE(cond, Err, ...)                                 \
    do {                                                              \
        if (!(cond)) ::lpmrf::detail::raise<::lpmrf::Err>(__VA_ARGS__); \
    } while (0)
