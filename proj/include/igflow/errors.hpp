#pragma once

#include <stdexcept>
#include <string>

namespace igflow {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct NonFiniteError : Error { using Error::Error; };
struct SingularMetricError : Error { using Error::Error; };
struct IdentifiabilityError : Error { using Error::Error; };
struct DomainExitError : Error { using Error::Error; };
struct StepLimitError : Error { using Error::Error; };
struct NonMonotoneError : Error { using Error::Error; };
struct GridMismatchError : Error { using Error::Error; };
struct TooFewSamplesError : Error { using Error::Error; };
struct TurningPointError : Error { using Error::Error; };
struct ModelMismatchError : Error { using Error::Error; };
struct UnknownModelError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace igflow
