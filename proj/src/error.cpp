#include "cfmm/error.hpp"

namespace cfmm {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DomainExceeded: return "DomainExceeded";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::PegRequired: return "PegRequired";
    case ErrorKind::NonConvexDetected: return "NonConvexDetected";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NoCrossing: return "NoCrossing";
    case ErrorKind::KappaZero: return "KappaZero";
    case ErrorKind::MuZero: return "MuZero";
    case ErrorKind::Diverged: return "Diverged";
    case ErrorKind::SpotPriceMismatch: return "SpotPriceMismatch";
    case ErrorKind::NotDifferentiable: return "NotDifferentiable";
    case ErrorKind::SingularJacobian: return "SingularJacobian";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace cfmm
