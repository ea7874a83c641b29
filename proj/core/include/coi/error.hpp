#pragma once

#include <stdexcept>
#include <string>

namespace coi {

/// Process exit codes shared by the CLI and the workspace layer.
enum class ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kMissingUpstream = 2,
  kIo = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Malformed input, violated invariant, or bad configuration.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message)
      : Error(ExitCode::kValidation, message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ExitCode::kIo, message) {}
};

/// A pipeline stage was asked to run before (or against stale) upstream output.
class UpstreamError : public Error {
 public:
  explicit UpstreamError(const std::string& message)
      : Error(ExitCode::kMissingUpstream, message) {}
};

/// Lookup of an identifier that does not exist in a catalog or graph.
class LookupError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

[[noreturn]] void throw_io(const std::string& what, const std::string& path);

}  // namespace coi
