#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace homogcl {

// Error taxonomy. The CLI maps these onto exit codes:
// ConfigError -> 1, NumericError -> 2, DataError/IoError -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or an infeasible request (bad key, bad probability,
// split that cannot be satisfied, misuse of a disabled component).
struct ConfigError : Error {
    using Error::Error;
};

// Non-finite values, undefined metrics, divergence.
struct NumericError : Error {
    using Error::Error;
};

// Malformed or inconsistent input data (parse failures, out-of-range
// endpoints, shape mismatches between files).
struct DataError : Error {
    using Error::Error;
};

// Filesystem-level failures.
struct IoError : Error {
    using Error::Error;
};

template <typename E = Error, typename... Parts>
[[noreturn]] void fail(const Parts&... parts) {
    std::ostringstream oss;
    (oss << ... << parts);
    throw E(oss.str());
}

template <typename... Parts>
void warn(const Parts&... parts) {
    std::ostringstream oss;
    (oss << ... << parts);
    std::cerr << "warning: " << oss.str() << "\n";
}

inline bool is_finite(double x) { return std::isfinite(x); }

}  // namespace homogcl
