#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bwmr/dataset.hpp"

namespace bwmr {

struct ModelConfig {
  double sigma0_sq = 1e12;  // prior variance of beta
  double a0 = 100.0;        // Beta(a0, 1) prior on pi_1
  int max_iter = 5000;
  double elbo_tol = 1e-8;   // on |dELBO| / (|ELBO| + 1)
  double weight_floor = 1e-10;
  double tau_sq_floor = 1e-8;
};

// Throws InvalidInput when a field is out of range.
void validate(const ModelConfig& cfg);

struct ModelParams {
  double tau_sq = 0.0;
  double sigma_sq = 1.0;
};

struct VariationalState {
  double mu_beta = 0.0;
  double sigma_beta_sq = 1.0;
  std::vector<double> mu_gamma;
  std::vector<double> sigma_gamma_sq;
  std::vector<double> pi_w;
  double a = 1.0;
  double b = 1.0;

  std::size_t size() const { return mu_gamma.size(); }
};

struct FitResult {
  VariationalState state;
  ModelParams params;
  std::vector<double> elbo_trace;  // ELBO after each full E+M iteration
  int iterations = 0;
  bool converged = false;
};

struct InitResult {
  VariationalState state;
  ModelParams params;
};

InitResult init_state(const SummaryDataset& data, const ModelConfig& cfg);

// Full coordinate sweep: beta block, each gamma_j block, each w_j block,
// then (a, b) so that a = a0 + sum(pi_w), b = N + 1 - sum(pi_w) on exit.
// `iteration` is only used to label numerical-failure errors.
VariationalState e_step(const VariationalState& state, const ModelParams& params,
                        const SummaryDataset& data, const ModelConfig& cfg, long iteration = -1);

// sigma^2 <- mean(mu_gamma^2 + sigma_gamma^2); tau^2 <- one minorize-maximize step.
ModelParams m_step(const VariationalState& state, const ModelParams& params,
                   const SummaryDataset& data, const ModelConfig& cfg);
ModelParams m_step(const VariationalState& state, const ModelParams& params,
                   const SummaryDataset& data);

// ELBO up to additive constants that depend on neither eta nor theta.
double compute_elbo(const VariationalState& state, const ModelParams& params,
                    const SummaryDataset& data, const ModelConfig& cfg);

FitResult fit_vem(const SummaryDataset& data, const ModelConfig& cfg = {});

// Single coordinate blocks of the E-step, each the exact maximizer of the
// ELBO over its own parameters with everything else held fixed.
namespace blocks {
void update_beta(VariationalState& s, const ModelParams& p, const SummaryDataset& d,
                 const ModelConfig& cfg);
void update_gamma(VariationalState& s, std::size_t j, const ModelParams& p,
                  const SummaryDataset& d);
void update_pi1(VariationalState& s, const ModelConfig& cfg);
void update_weight(VariationalState& s, std::size_t j, const ModelParams& p,
                   const SummaryDataset& d, const ModelConfig& cfg);
}  // namespace blocks

// Analytic gradient of compute_elbo with respect to eta, laid out as
// (mu_beta, sigma_beta_sq, [mu_gamma_j, sigma_gamma_sq_j, pi_w_j]_j, a, b).
std::vector<double> elbo_gradient(const VariationalState& state, const ModelParams& params,
                                  const SummaryDataset& data, const ModelConfig& cfg);

// Flat views of eta in the same layout as elbo_gradient.
std::vector<double> pack_eta(const VariationalState& state);
VariationalState unpack_eta(const std::vector<double>& eta);

// Checks positivity, weight bounds and the (a, b) identities; returns an
// empty string when everything holds, else a description of the first breach.
std::string check_state(const VariationalState& state, const ModelConfig& cfg, double tol = 1e-9);

}  // namespace bwmr
