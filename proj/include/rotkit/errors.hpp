#pragma once

#include <stdexcept>
#include <string>

namespace rotkit {

/// Bad configuration (unknown keys, invalid combinations). CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or out-of-contract input data. CLI exit code 3.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical breakdown (iteration failure, non-finite loss). CLI exit code 4.
struct NumericalFailure : std::runtime_error {
    explicit NumericalFailure(const std::string& msg) : std::runtime_error(msg) {}
};

/// Degenerate input to an orthogonalization map (zero or parallel columns).
struct SingularInput : DataError {
    explicit SingularInput(const std::string& msg) : DataError(msg) {}
};

} // namespace rotkit
