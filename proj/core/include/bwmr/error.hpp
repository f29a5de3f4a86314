#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bwmr {

enum class ErrorKind {
  InvalidInput,          // bad values in an in-memory dataset or config
  DatasetTooSmall,
  NumericalFailure,      // non-finite ELBO, non-increasing ELBO, diverging solver
  DegenerateInference,   // LRVB linear system singular
  InferenceInvalid,      // LRVB corrected variance not positive
  UndefinedEstimator,    // e.g. IVW with every gamma_hat == 0
  CollinearInstruments,
  InsufficientInstruments,
  OptimizationFailure,
  GridTooNarrow,
  EmptySelection,
  Schema,
  RowParse,
  DuplicateKey,
  NoCommonInstruments,
  Io,
  Usage,
};

std::string_view to_string(ErrorKind kind);

// Input-side failures map to CLI exit code 2, everything else to 3.
bool is_input_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, long iteration = -1)
      : std::runtime_error(message), kind_(kind), iteration_(iteration) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Iteration at which an iterative routine failed, or -1.
  long iteration() const noexcept { return iteration_; }

 private:
  ErrorKind kind_;
  long iteration_;
};

}  // namespace bwmr
