#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlasso {

enum class ErrorKind {
  DegenerateLink,
  DimensionMismatch,
  IncompatiblePrior,
  InvalidArgument,
  SingularMatrix,
  NoInteriorSolution,
  FixedPointDiverged,
  InvalidDelta,
  InvalidRatio,
  DegenerateDesign,
  NotConverged,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Exception type for every failure raised by the library. The kind is the
/// stable, testable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nlasso
