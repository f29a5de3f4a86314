#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bwmr/dataset.hpp"
#include "bwmr/model.hpp"

namespace bwmr {

// Index helpers for the moment vector
//   (m_b1, m_b2, [m_gj1, m_gj2, m_wj]_j, m_pi1, m_pi2),  length 3N + 4.
namespace moment_index {
constexpr Eigen::Index beta1 = 0;
constexpr Eigen::Index beta2 = 1;
constexpr Eigen::Index gamma1(std::size_t j) { return 2 + 3 * static_cast<Eigen::Index>(j); }
constexpr Eigen::Index gamma2(std::size_t j) { return 3 + 3 * static_cast<Eigen::Index>(j); }
constexpr Eigen::Index w(std::size_t j) { return 4 + 3 * static_cast<Eigen::Index>(j); }
constexpr Eigen::Index pi1(std::size_t n) { return 3 * static_cast<Eigen::Index>(n) + 2; }
constexpr Eigen::Index pi2(std::size_t n) { return 3 * static_cast<Eigen::Index>(n) + 3; }
}  // namespace moment_index

struct LrvbMatrices {
  Eigen::MatrixXd V;
  Eigen::MatrixXd H1;
  Eigen::VectorXd g;  // selector (1, 0, ..., 0)
};

struct LrvbOptions {
  double gradient_tol = 1e-4;  // stale-state guard on ||dELBO/d eta||_inf
  std::size_t polish_sweeps = 1000;  // extra E-steps at fixed params before the correction
  double polish_tol = 1e-8;
};

struct VarianceCorrection {
  double variance = 0.0;       // linear-response variance of beta
  double mfvb_variance = 0.0;  // sigma_beta_sq
  double gradient_norm = 0.0;  // over non-clamped eta coordinates
  bool stale = false;
  std::vector<std::string> warnings;
};

struct CausalEstimate {
  double beta_hat = 0.0;
  double se = 0.0;
  double se_mfvb = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  std::vector<double> weights;
  double tau_sq = 0.0;
  double sigma_sq = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> elbo_trace;
  std::vector<std::string> warnings;
};

Eigen::VectorXd moments_from_state(const VariationalState& state);
Eigen::MatrixXd build_V(const VariationalState& state);

Eigen::MatrixXd build_H1(const Eigen::VectorXd& m, const ModelParams& params,
                         const SummaryDataset& data);
Eigen::MatrixXd build_H1(const VariationalState& state, const ModelParams& params,
                         const SummaryDataset& data, const ModelConfig& cfg);

LrvbMatrices build_matrices(const VariationalState& state, const ModelParams& params,
                            const SummaryDataset& data, const ModelConfig& cfg);

// E_q[log joint] as a function of the moment vector, with the same dropped
// constants as compute_elbo, and its analytic gradient.
double expected_log_joint(const Eigen::VectorXd& m, const ModelParams& params,
                          const SummaryDataset& data, const ModelConfig& cfg);
Eigen::VectorXd expected_log_joint_gradient(const Eigen::VectorXd& m, const ModelParams& params,
                                            const SummaryDataset& data, const ModelConfig& cfg);

// -[(V H1 - I)^{-1} V]_{11} by one LU solve.  Throws DegenerateInference when
// the system is numerically singular; does not check the sign.
double linear_response_11(const Eigen::MatrixXd& V, const Eigen::MatrixXd& H1);

VarianceCorrection corrected_variance(const VariationalState& state, const ModelParams& params,
                                      const SummaryDataset& data, const ModelConfig& cfg,
                                      const LrvbOptions& opt = {});

CausalEstimate estimate(const SummaryDataset& data, const ModelConfig& cfg = {},
                        const LrvbOptions& opt = {});
CausalEstimate estimate_from_fit(const FitResult& fit, const SummaryDataset& data,
                                 const ModelConfig& cfg, const LrvbOptions& opt = {});

// Linear response on a Gaussian target N(mu0, Sigma0), using the mean-field
// Gaussian fit as the base.  Returns the uncorrected and corrected variance of
// the first coordinate.
struct GaussianResponse {
  double mfvb_variance;
  double lrvb_variance;
};
GaussianResponse gaussian_linear_response(const Eigen::VectorXd& mu0, const Eigen::MatrixXd& Sigma0);

}  // namespace bwmr
