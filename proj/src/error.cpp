#include "ftfc/error.hpp"

namespace ftfc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidAirData: return "invalid_airdata";
    case ErrorKind::kStateSingularity: return "state_singularity";
    case ErrorKind::kNumericalDivergence: return "numerical_divergence";
    case ErrorKind::kTrimFailure: return "trim_failure";
    case ErrorKind::kEnvelope: return "envelope";
    case ErrorKind::kScenarioNotFound: return "scenario_not_found";
    case ErrorKind::kUnknownParameter: return "unknown_parameter";
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kTrainingDivergence: return "training_divergence";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kEmptyDataset: return "empty_dataset";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kInvalidArgument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace ftfc
