#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cspin {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  NotPositive,
  Degenerate,
  MatchingFailed,
  NotConverged,
  ResourceLimit,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. The kind is what the CLI reports in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cspin
