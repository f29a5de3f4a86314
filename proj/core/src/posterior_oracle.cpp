#include "bwmr/posterior_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "bwmr/error.hpp"
#include "bwmr/special.hpp"

namespace bwmr::sim {

OracleGrid default_oracle_grid(const VariationalState& state) {
  return {state.mu_beta, 8.0 * std::sqrt(state.sigma_beta_sq), 4001};
}

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double log_sum_exp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

OracleResult exact_posterior_oracle(const SummaryDataset& data, const ModelConfig& cfg,
                                    const ModelParams& params, const OracleGrid& grid) {
  validate(data);
  const std::size_t n = data.size();
  if (n < 1 || n > 10) throw Error(ErrorKind::InvalidInput, "oracle enumerates 2^N weight vectors; need 1 <= N <= 10");
  if (grid.points < 3 || !(grid.half_width > 0.0)) throw Error(ErrorKind::InvalidInput, "oracle grid needs >= 3 points and positive width");

  const double s2 = params.sigma_sq;
  // log Beta-Bernoulli prior of a weight vector with k ones
  std::vector<double> log_prior_k(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    log_prior_k[k] = special::log_beta(cfg.a0 + static_cast<double>(k), 1.0 + static_cast<double>(n - k)) -
                     special::log_beta(cfg.a0, 1.0);
  }
  // w_j = 0: only the exposure association, gamma_j integrated out
  std::vector<double> l0(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double v = s2 + data.sigma_x[j] * data.sigma_x[j];
    l0[j] = -0.5 * (kLog2Pi + std::log(v) + data.gamma_hat[j] * data.gamma_hat[j] / v);
  }

  const std::size_t configs = std::size_t{1} << n;
  std::vector<double> popcount(configs);
  for (std::size_t c = 0; c < configs; ++c) popcount[c] = static_cast<double>(__builtin_popcountll(c));

  const std::size_t m = grid.points;
  const double lo = grid.center - grid.half_width;
  const double h = 2.0 * grid.half_width / static_cast<double>(m - 1);
  std::vector<double> beta(m), logf(m), l1(n), terms(configs);
  for (std::size_t i = 0; i < m; ++i) {
    const double b = lo + h * static_cast<double>(i);
    beta[i] = b;
    for (std::size_t j = 0; j < n; ++j) {
      // (gamma_hat, Gamma_hat) jointly normal after integrating gamma_j
      const double vxx = s2 + data.sigma_x[j] * data.sigma_x[j];
      const double vxy = b * s2;
      const double vyy = b * b * s2 + data.sigma_y[j] * data.sigma_y[j] + params.tau_sq;
      const double det = vxx * vyy - vxy * vxy;
      const double x = data.gamma_hat[j], y = data.Gamma_hat[j];
      const double q = (vyy * x * x - 2.0 * vxy * x * y + vxx * y * y) / det;
      l1[j] = -kLog2Pi - 0.5 * std::log(det) - 0.5 * q;
    }
    for (std::size_t c = 0; c < configs; ++c) {
      double t = log_prior_k[static_cast<std::size_t>(popcount[c])];
      for (std::size_t j = 0; j < n; ++j) t += ((c >> j) & 1u) ? l1[j] : l0[j];
      terms[c] = t;
    }
    logf[i] = -b * b / (2.0 * cfg.sigma0_sq) + log_sum_exp(terms);
  }

  const double mx = *std::max_element(logf.begin(), logf.end());
  if (!std::isfinite(mx)) throw Error(ErrorKind::NumericalFailure, "oracle density is not finite on the grid");
  std::vector<double> w(m);
  double z = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double trap = (i == 0 || i == m - 1) ? 0.5 : 1.0;
    w[i] = trap * std::exp(logf[i] - mx);
    z += w[i];
    s1 += w[i] * beta[i];
  }
  OracleResult r;
  r.mean = s1 / z;
  double s2c = 0.0;
  for (std::size_t i = 0; i < m; ++i) s2c += w[i] * (beta[i] - r.mean) * (beta[i] - r.mean);
  r.variance = s2c / z;

  const double edge = 0.01 * 2.0 * grid.half_width;
  double left = 0.0, right = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (beta[i] <= lo + edge) left += w[i];
    if (beta[i] >= lo + 2.0 * grid.half_width - edge) right += w[i];
  }
  r.boundary_mass = std::max(left, right) / z;
  if (r.boundary_mass > 1e-6) {
    throw Error(ErrorKind::GridTooNarrow,
                "oracle grid too narrow: boundary mass " + std::to_string(r.boundary_mass));
  }
  return r;
}

}  // namespace bwmr::sim
