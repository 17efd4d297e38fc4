#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace percoflow {

enum class ErrorCode {
  InvalidArgument,
  MalformedLaw,
  RegionTooLarge,
  DegenerateBody,
  UnboundedPolytope,
  EmptyDiscretization,
  DegenerateCylinder,
  EmptyCrystal,
  OverflowGuard,
  TooLarge,
  NoStabilization,
  NotSeparating,
  MissingDirection,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace percoflow
