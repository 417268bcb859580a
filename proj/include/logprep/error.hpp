#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace logprep {

enum class ErrorCode {
  EmptyInput,
  MissingFieldsDirective,
  MalformedEdgeLine,
  MissingGraph,
  Io,
  Config,
  InfeasibleFixture,
  InvariantViolation,
  MalformedTable,
};

std::string_view to_string(ErrorCode code);

// Every failure the library reports is an Error carrying one of the codes
// above; line-level parse problems are not errors (see SkipReason).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace logprep
