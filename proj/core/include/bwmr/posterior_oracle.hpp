#pragma once

#include <cstddef>

#include "bwmr/dataset.hpp"
#include "bwmr/model.hpp"

namespace bwmr::sim {

struct OracleGrid {
  double center = 0.0;
  double half_width = 1.0;
  std::size_t points = 4001;
};

// mu_beta +/- 8 sqrt(sigma_beta_sq), 4001 points.
OracleGrid default_oracle_grid(const VariationalState& state);

struct OracleResult {
  double mean = 0.0;
  double variance = 0.0;
  double boundary_mass = 0.0;  // larger of the two outer-1% tail masses
};

// Exact posterior of beta given (tau^2, sigma^2): gamma_j integrated in
// closed form, every w in {0,1}^N enumerated under the Beta-Bernoulli prior,
// trapezoid quadrature over the beta grid.  N <= 10.
OracleResult exact_posterior_oracle(const SummaryDataset& data, const ModelConfig& cfg,
                                    const ModelParams& params, const OracleGrid& grid);

}  // namespace bwmr::sim
