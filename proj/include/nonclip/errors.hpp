#pragma once

#include <stdexcept>
#include <string>

namespace nonclip {

/// Shape or kind mismatch between parameter containers, norms and problems.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// NaN/Inf produced by an operation, or an iterative routine that failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid optimizer or experiment configuration, including step-time violations
/// such as a short step leaving the simplicial range.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nonclip
