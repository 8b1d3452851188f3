#include "csmci/error.hpp"

namespace csmci {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "invalid-dimension";
    case ErrorKind::InvalidRegion: return "invalid-region";
    case ErrorKind::UnsupportedTemplate: return "unsupported-template";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::EnumerationLimit: return "enumeration-limit";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::InsufficientSamples: return "insufficient-samples";
    case ErrorKind::TraceMismatch: return "trace-mismatch";
    case ErrorKind::SingularCovariance: return "singular-covariance";
    case ErrorKind::IncompleteMoments: return "incomplete-moments";
    case ErrorKind::DivergedTraining: return "diverged-training";
    case ErrorKind::GraphMismatch: return "graph-mismatch";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Unsupported: return "unsupported";
  }
  return "unknown";
}

}  // namespace csmci
