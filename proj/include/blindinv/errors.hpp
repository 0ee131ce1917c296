// Error types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace blindinv {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input that cannot be processed at all (all-zero signal, constant signal, ...).
struct DegenerateInputError : Error {
  using Error::Error;
};

// Invalid configuration value or unmet precondition on a parameter.
struct ConfigError : Error {
  using Error::Error;
};

// Covariance estimate is singular or otherwise not usable as an SPD matrix.
struct RankDeficiencyError : Error {
  using Error::Error;
};

}  // namespace blindinv
