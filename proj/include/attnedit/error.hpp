#pragma once

#include <stdexcept>
#include <string>

namespace attnedit {

/// Broad failure classes. The CLI maps each one to a process exit code.
enum class ErrorKind {
  Dimension,   // shapes do not conform
  Domain,      // argument outside the operation's precondition
  Format,      // file or container violates its layout invariants
  Usage,       // bad command-line input or missing named item
  Validation,  // a numerical check did not meet its tolerance
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Short, greppable tag such as "E_DIM".
  const char* code() const noexcept {
    switch (kind_) {
      case ErrorKind::Dimension: return "E_DIM";
      case ErrorKind::Domain: return "E_DOMAIN";
      case ErrorKind::Format: return "E_FORMAT";
      case ErrorKind::Usage: return "E_USAGE";
      case ErrorKind::Validation: return "E_VALIDATION";
    }
    return "E_UNKNOWN";
  }

 private:
  ErrorKind kind_;
};

}  // namespace attnedit
