#include "certbound/error.hpp"

namespace certbound {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TiltOverflow: return "TiltOverflow";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::OutOfHull: return "OutOfHull";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::BadChannel: return "BadChannel";
    case ErrorCode::QuadratureBudget: return "QuadratureBudget";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace certbound
