#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cfmm {

enum class ErrorKind {
  InvalidArgument,
  DomainExceeded,
  NoRoot,
  PegRequired,
  NonConvexDetected,
  OutOfRange,
  NoCrossing,
  KappaZero,
  MuZero,
  Diverged,
  SpotPriceMismatch,
  NotDifferentiable,
  SingularJacobian,
  GridTooCoarse,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a machine-readable kind so the
// CLI can map it onto exit codes and callers can branch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace cfmm
