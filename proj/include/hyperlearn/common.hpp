#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hyperlearn {

inline constexpr const char* kVersion = "hyperlearn 0.1.0";

// Thrown for malformed configs, files, or argument contracts. CLI exit code 1.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a tensor operation receives incompatible shapes.
struct shape_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when a run produces non-finite values it cannot recover from. CLI exit code 2.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for filesystem failures. CLI exit code 3.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hyperlearn
