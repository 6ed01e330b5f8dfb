#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ftfc {

enum class ErrorKind {
  kInvalidAirData,
  kStateSingularity,
  kNumericalDivergence,
  kTrimFailure,
  kEnvelope,
  kScenarioNotFound,
  kUnknownParameter,
  kUsage,
  kTrainingDivergence,
  kDimensionMismatch,
  kEmptyDataset,
  kSchema,
  kIo,
  kInvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind so the
/// CLI can report it as JSON and the environment can map physics failures to
/// crashes.
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

}  // namespace ftfc
