#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bwmr/simulation.hpp"

namespace bwmr::cli {

enum class Format { Json, Tsv };

struct FitOptions {
  std::string exposure;
  std::string outcome;
  double pval_threshold = 5e-8;
  std::vector<sim::Estimator> methods{sim::Estimator::BWMR};
  bool keep_palindromic = false;
  std::string out_path;  // empty: write to the output stream
  Format format = Format::Json;
  std::uint64_t seed = 1;
  bool reproducible = false;
};

struct SimulateOptions {
  sim::SimulationSpec spec;
  std::size_t reps = 100;
  std::vector<sim::Estimator> methods{sim::Estimator::BWMR};
  std::size_t threads = 0;  // 0: available parallelism
  std::string out_path;
  std::string qq_path;
  bool reproducible = false;
};

// Both return the process exit code: 0 ok, 2 input error, 3 numerical failure.
// Errors are reported as one JSON line on `err`.
int cmd_fit(const FitOptions& opt, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);

// Full command line, args[0] being the subcommand ("fit" or "simulate").
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bwmr::cli
