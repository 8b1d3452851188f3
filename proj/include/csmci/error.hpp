#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace csmci {

enum class ErrorKind {
  InvalidDimension,
  InvalidRegion,
  UnsupportedTemplate,
  Configuration,
  EnumerationLimit,
  EmptyInput,
  InsufficientSamples,
  TraceMismatch,
  SingularCovariance,
  IncompleteMoments,
  DivergedTraining,
  GraphMismatch,
  ShapeMismatch,
  InvalidConfig,
  Parse,
  Unsupported,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace csmci
