#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace causalcast {

enum class ErrorKind {
  NoOverlap,
  DuplicateDate,
  InsufficientHistory,
  InvalidPanel,
  BadTransformCode,
  MalformedCsv,
  DomainError,
  OverlappingRanges,
  BadRange,
  Underdetermined,
  InfiniteStatistic,
  DegenerateInput,
  BadK,
  TooManyCovariates,
  NotAcyclic,
  BadName,
  PreconditionViolated,
  NeedEnvironments,
  ShapeError,
  WindowTooLong,
  Insufficient,
  Misaligned,
  GenerationFailed,
  Timeout,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` is the machine-readable tag.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace causalcast
