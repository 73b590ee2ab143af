#pragma once

#include <stdexcept>
#include <string>

namespace nashseek {

// Failure classes map onto CLI exit codes:
//   0 success, 2 validation failure, 3 numerical failure, 4 I/O failure.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad inputs: dimension mismatches, invalid graphs or weights, out-of-range
// parameters, malformed or inconsistent configs.
struct ValidationError : Error {
    using Error::Error;
};

// Non-finite state, violated runtime invariants, failed convergence.
struct NumericalError : Error {
    using Error::Error;
};

// Filesystem failures: unreadable config, unwritable output.
struct IoError : Error {
    using Error::Error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

}  // namespace nashseek
