#pragma once

#include <stdexcept>
#include <string>

namespace panoscan {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The caller combined arguments in a way the API does not allow.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Invalid trajectory or pipeline configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported input data (images, JSON documents).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A guarantee the library relies on did not hold (e.g. a prompt that no
/// frame of the trajectory can see).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Failure inside a segmentation backend. `stage()` names the pipeline step
/// that was running when the failure surfaced.
class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what, std::string stage = {})
      : Error(what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// The backend could not be reached or the connection dropped.
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// The backend answered, but the answer violates the wire protocol.
class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// The backend returned a different number of masks than frames submitted.
class FrameCountMismatch : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

/// Process exit codes used by the command line tool.
enum class ExitCode : int { success = 0, usage = 1, data = 2, backend = 3 };

/// Maps an exception onto the exit code convention of the command line tool.
ExitCode exit_code_for(const std::exception& e) noexcept;

}  // namespace panoscan
