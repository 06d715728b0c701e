#pragma once

#include <stdexcept>
#include <string>

namespace osaom {

// Error taxonomy mirrors the CLI exit-code contract:
//   config/specification -> 2, data -> 1, numerical -> 3, non-convergence -> 4.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input files.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Singular matrices, non-finite objectives, untestable statistics.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace osaom
