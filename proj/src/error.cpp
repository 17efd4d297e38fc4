#include "percoflow/error.hpp"

namespace percoflow {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedLaw: return "MalformedLaw";
    case ErrorCode::RegionTooLarge: return "RegionTooLarge";
    case ErrorCode::DegenerateBody: return "DegenerateBody";
    case ErrorCode::UnboundedPolytope: return "UnboundedPolytope";
    case ErrorCode::EmptyDiscretization: return "EmptyDiscretization";
    case ErrorCode::DegenerateCylinder: return "DegenerateCylinder";
    case ErrorCode::EmptyCrystal: return "EmptyCrystal";
    case ErrorCode::OverflowGuard: return "OverflowGuard";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NoStabilization: return "NoStabilization";
    case ErrorCode::NotSeparating: return "NotSeparating";
    case ErrorCode::MissingDirection: return "MissingDirection";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace percoflow
