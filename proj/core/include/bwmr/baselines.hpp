#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "bwmr/dataset.hpp"

namespace bwmr::baselines {

enum class Method { IVW, Egger, GSMR, RAPS };
std::string_view to_string(Method m);

struct BaselineEstimate {
  Method method = Method::IVW;
  double beta_hat = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  double intercept = 0.0;     // Egger only
  double intercept_se = 0.0;  // Egger only
  double tau_sq = 0.0;        // RAPS only
  std::vector<std::size_t> removed_snps;  // GSMR only
  std::size_t target_snp = 0;             // GSMR only
  // Residual variance exactly zero (se = 0) or p below the smallest normal
  // double; p is then reported as 0.
  bool degenerate_fit = false;
};

BaselineEstimate ivw(const SummaryDataset& data);
BaselineEstimate egger(const SummaryDataset& data);
BaselineEstimate gsmr_lite(const SummaryDataset& data, double outlier_alpha = 0.01);

struct RapsOptions {
  std::optional<double> fixed_tau_sq;  // skip the outer search
  int max_outer_iter = 500;
  double tol = 1e-10;
};
BaselineEstimate raps_lite(const SummaryDataset& data, const RapsOptions& opt = {});

// Profile log-likelihood maximized by raps_lite, and its first two
// derivatives in beta.
double raps_loglik(const SummaryDataset& data, double beta, double tau_sq);
double raps_score(const SummaryDataset& data, double beta, double tau_sq);
double raps_curvature(const SummaryDataset& data, double beta, double tau_sq);

}  // namespace bwmr::baselines
