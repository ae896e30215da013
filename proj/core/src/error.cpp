#include "nlasso/error.hpp"

namespace nlasso {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateLink: return "DegenerateLink";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IncompatiblePrior: return "IncompatiblePrior";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::NoInteriorSolution: return "NoInteriorSolution";
    case ErrorKind::FixedPointDiverged: return "FixedPointDiverged";
    case ErrorKind::InvalidDelta: return "InvalidDelta";
    case ErrorKind::InvalidRatio: return "InvalidRatio";
    case ErrorKind::DegenerateDesign: return "DegenerateDesign";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace nlasso
