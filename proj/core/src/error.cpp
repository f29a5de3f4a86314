#include "bwmr/error.hpp"

namespace bwmr {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DatasetTooSmall: return "dataset-too-small";
    case ErrorKind::NumericalFailure: return "numerical-failure";
    case ErrorKind::DegenerateInference: return "degenerate-inference";
    case ErrorKind::InferenceInvalid: return "inference-invalid";
    case ErrorKind::UndefinedEstimator: return "undefined-estimator";
    case ErrorKind::CollinearInstruments: return "collinear-instruments";
    case ErrorKind::InsufficientInstruments: return "insufficient-instruments";
    case ErrorKind::OptimizationFailure: return "optimization-failure";
    case ErrorKind::GridTooNarrow: return "grid-too-narrow";
    case ErrorKind::EmptySelection: return "empty-selection";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::RowParse: return "row-parse";
    case ErrorKind::DuplicateKey: return "duplicate-key";
    case ErrorKind::NoCommonInstruments: return "no-common-instruments";
    case ErrorKind::Io: return "io";
    case ErrorKind::Usage: return "usage";
  }
  return "unknown";
}

bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::DatasetTooSmall:
    case ErrorKind::EmptySelection:
    case ErrorKind::InsufficientInstruments:
    case ErrorKind::Schema:
    case ErrorKind::RowParse:
    case ErrorKind::DuplicateKey:
    case ErrorKind::NoCommonInstruments:
    case ErrorKind::Io:
    case ErrorKind::Usage:
      return true;
    default:
      return false;
  }
}

}  // namespace bwmr
