#pragma once

#include <stdexcept>
#include <string>

namespace syncon {

// Error taxonomy mirrors the process exit codes: bad inputs are 2,
// numeric/solver failures are 3.
enum class ErrorCode : int {
  invalid_input = 2,
  numeric_failure = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_invalid(const std::string& message) {
  throw Error(ErrorCode::invalid_input, message);
}

[[noreturn]] inline void throw_numeric(const std::string& message) {
  throw Error(ErrorCode::numeric_failure, message);
}

}  // namespace syncon
