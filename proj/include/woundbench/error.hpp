#pragma once

#include <stdexcept>
#include <string>

namespace woundbench {

// Input errors are bad files, flags, or preconditions; numerical errors are
// failures of an otherwise valid computation (no overlap, degenerate fit).
enum class ErrorKind { input, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error input_error(const std::string& message) {
  return Error(ErrorKind::input, message);
}

inline Error numerical_error(const std::string& message) {
  return Error(ErrorKind::numerical, message);
}

} // namespace woundbench
