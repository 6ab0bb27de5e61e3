#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace certbound {

enum class ErrorCode {
  TiltOverflow,
  DegenerateVariance,
  OutOfHull,
  NoConvergence,
  NoBracket,
  TooLarge,
  BadParams,
  BadChannel,
  QuadratureBudget,
  QuadratureFailure,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace certbound
