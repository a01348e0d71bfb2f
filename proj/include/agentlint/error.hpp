#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace agentlint {

enum class ErrorCode {
  RootNotFound,
  NoSourceFiles,
  SyntaxError,
  IoError,
  PredicateFailure,
  NodeNotInTree,
  StaleSpan,
  BackendUnreachable,
  FormatInvalid,
  AuthMissing,
  PreconditionViolation,
  NoRule,
  RegistryUnavailable,
  ConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::RootNotFound: return "RootNotFound";
    case ErrorCode::NoSourceFiles: return "NoSourceFiles";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::PredicateFailure: return "PredicateFailure";
    case ErrorCode::NodeNotInTree: return "NodeNotInTree";
    case ErrorCode::StaleSpan: return "StaleSpan";
    case ErrorCode::BackendUnreachable: return "BackendUnreachable";
    case ErrorCode::FormatInvalid: return "FormatInvalid";
    case ErrorCode::AuthMissing: return "AuthMissing";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::NoRule: return "NoRule";
    case ErrorCode::RegistryUnavailable: return "RegistryUnavailable";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

// Base of every error the library throws. The code is stable and is what
// callers (and the CLI exit-code mapping) switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::string file, std::uint32_t line, const std::string& message)
      : Error(ErrorCode::SyntaxError, file + ":" + std::to_string(line) + ": " + message),
        file_(std::move(file)),
        line_(line),
        detail_(message) {}

  const std::string& file() const noexcept { return file_; }
  std::uint32_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string file_;
  std::uint32_t line_;
  std::string detail_;
};

class FormatInvalid : public Error {
 public:
  explicit FormatInvalid(std::string offending_line, const std::string& why)
      : Error(ErrorCode::FormatInvalid, why + " (line: \"" + offending_line + "\")"),
        line_(std::move(offending_line)) {}

  const std::string& offending_line() const noexcept { return line_; }

 private:
  std::string line_;
};

}  // namespace agentlint
