#pragma once

#include <stdexcept>

namespace jcloss {

// Error taxonomy; the CLI maps these onto distinct exit codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct TruncationError : Error { using Error::Error; };
struct IntegratorError : Error { using Error::Error; };
struct OracleCapExceeded : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };

struct EstimatorError : Error { using Error::Error; };
struct WindowTooShort : EstimatorError { using EstimatorError::EstimatorError; };

}  // namespace jcloss
