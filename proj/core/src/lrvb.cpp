#include "bwmr/lrvb.hpp"

#include <cmath>
#include <numbers>

#include "bwmr/detail/sum.hpp"
#include "bwmr/error.hpp"
#include "bwmr/special.hpp"

namespace bwmr {

namespace mi = moment_index;

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

void gaussian_block(Eigen::MatrixXd& V, Eigen::Index i, double mu, double var) {
  V(i, i) = var;
  V(i, i + 1) = V(i + 1, i) = 2.0 * mu * var;
  V(i + 1, i + 1) = 2.0 * var * var + 4.0 * mu * mu * var;
}

std::size_t n_from_moments(const Eigen::VectorXd& m) {
  if (m.size() < 4 || (m.size() - 4) % 3 != 0) {
    throw Error(ErrorKind::InvalidInput, "moment vector length must be 3N + 4");
  }
  return static_cast<std::size_t>((m.size() - 4) / 3);
}

double s_of(const SummaryDataset& d, std::size_t j, double tau_sq) {
  return d.sigma_y[j] * d.sigma_y[j] + tau_sq;
}

}  // namespace

Eigen::VectorXd moments_from_state(const VariationalState& s) {
  const std::size_t n = s.size();
  Eigen::VectorXd m(3 * n + 4);
  m(mi::beta1) = s.mu_beta;
  m(mi::beta2) = s.mu_beta * s.mu_beta + s.sigma_beta_sq;
  for (std::size_t j = 0; j < n; ++j) {
    m(mi::gamma1(j)) = s.mu_gamma[j];
    m(mi::gamma2(j)) = s.mu_gamma[j] * s.mu_gamma[j] + s.sigma_gamma_sq[j];
    m(mi::w(j)) = s.pi_w[j];
  }
  const double psi_ab = special::digamma(s.a + s.b);
  m(mi::pi1(n)) = special::digamma(s.a) - psi_ab;
  m(mi::pi2(n)) = special::digamma(s.b) - psi_ab;
  return m;
}

Eigen::MatrixXd build_V(const VariationalState& s) {
  const std::size_t n = s.size();
  const Eigen::Index dim = 3 * static_cast<Eigen::Index>(n) + 4;
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(dim, dim);
  gaussian_block(V, mi::beta1, s.mu_beta, s.sigma_beta_sq);
  for (std::size_t j = 0; j < n; ++j) {
    gaussian_block(V, mi::gamma1(j), s.mu_gamma[j], s.sigma_gamma_sq[j]);
    V(mi::w(j), mi::w(j)) = s.pi_w[j] * (1.0 - s.pi_w[j]);
  }
  const double t_ab = special::trigamma(s.a + s.b);
  const Eigen::Index p1 = mi::pi1(n), p2 = mi::pi2(n);
  V(p1, p1) = special::trigamma(s.a) - t_ab;
  V(p1, p2) = V(p2, p1) = -t_ab;
  V(p2, p2) = special::trigamma(s.b) - t_ab;
  return V;
}

Eigen::MatrixXd build_H1(const Eigen::VectorXd& m, const ModelParams& p, const SummaryDataset& d) {
  const std::size_t n = n_from_moments(m);
  if (n != d.size()) throw Error(ErrorKind::InvalidInput, "moment vector does not match dataset");
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m.size(), m.size());
  auto set = [&H](Eigen::Index i, Eigen::Index k, double v) { H(i, k) = H(k, i) = v; };
  const Eigen::Index p1 = mi::pi1(n), p2 = mi::pi2(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double sj = s_of(d, j, p.tau_sq);
    const double G = d.Gamma_hat[j];
    const double mw = m(mi::w(j));
    const Eigen::Index g1 = mi::gamma1(j), g2 = mi::gamma2(j), w = mi::w(j);
    set(mi::beta1, g1, mw * G / sj);
    set(mi::beta1, w, m(g1) * G / sj);
    set(mi::beta2, g2, -mw / (2.0 * sj));
    set(mi::beta2, w, -m(g2) / (2.0 * sj));
    set(g1, w, m(mi::beta1) * G / sj);
    set(g2, w, -m(mi::beta2) / (2.0 * sj));
    set(p1, w, 1.0);
    set(p2, w, -1.0);
  }
  return H;
}

Eigen::MatrixXd build_H1(const VariationalState& s, const ModelParams& p, const SummaryDataset& d,
                         const ModelConfig&) {
  return build_H1(moments_from_state(s), p, d);
}

LrvbMatrices build_matrices(const VariationalState& s, const ModelParams& p,
                            const SummaryDataset& d, const ModelConfig& cfg) {
  LrvbMatrices out;
  out.V = build_V(s);
  out.H1 = build_H1(s, p, d, cfg);
  out.g = Eigen::VectorXd::Zero(out.V.rows());
  out.g(0) = 1.0;
  return out;
}

double expected_log_joint(const Eigen::VectorXd& m, const ModelParams& p, const SummaryDataset& d,
                          const ModelConfig& cfg) {
  const std::size_t n = n_from_moments(m);
  const double mb1 = m(mi::beta1), mb2 = m(mi::beta2);
  const double mp1 = m(mi::pi1(n)), mp2 = m(mi::pi2(n));
  std::vector<double> terms(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double sj = s_of(d, j, p.tau_sq);
    const double sx2 = d.sigma_x[j] * d.sigma_x[j];
    const double G = d.Gamma_hat[j];
    const double mg1 = m(mi::gamma1(j)), mg2 = m(mi::gamma2(j)), mw = m(mi::w(j));
    double t = -(mg2 - 2.0 * d.gamma_hat[j] * mg1) / (2.0 * sx2);
    t += mw * (-kHalfLog2Pi - 0.5 * std::log(sj) - (mb2 * mg2 - 2.0 * mb1 * G * mg1 + G * G) / (2.0 * sj));
    t += -mg2 / (2.0 * p.sigma_sq);
    t += mw * mp1 + (1.0 - mw) * mp2;
    terms[j] = t;
  }
  return detail::ordered_sum(terms) - mb2 / (2.0 * cfg.sigma0_sq) + (cfg.a0 - 1.0) * mp1;
}

Eigen::VectorXd expected_log_joint_gradient(const Eigen::VectorXd& m, const ModelParams& p,
                                            const SummaryDataset& d, const ModelConfig& cfg) {
  const std::size_t n = n_from_moments(m);
  const double mb1 = m(mi::beta1), mb2 = m(mi::beta2);
  const double mp1 = m(mi::pi1(n)), mp2 = m(mi::pi2(n));
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m.size());
  double g_b1 = 0.0, g_b2 = -1.0 / (2.0 * cfg.sigma0_sq), sum_w = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double sj = s_of(d, j, p.tau_sq);
    const double sx2 = d.sigma_x[j] * d.sigma_x[j];
    const double G = d.Gamma_hat[j];
    const double mg1 = m(mi::gamma1(j)), mg2 = m(mi::gamma2(j)), mw = m(mi::w(j));
    g_b1 += mw * mg1 * G / sj;
    g_b2 -= mw * mg2 / (2.0 * sj);
    g(mi::gamma1(j)) = d.gamma_hat[j] / sx2 + mw * mb1 * G / sj;
    g(mi::gamma2(j)) = -1.0 / (2.0 * sx2) - mw * mb2 / (2.0 * sj) - 1.0 / (2.0 * p.sigma_sq);
    g(mi::w(j)) = -kHalfLog2Pi - 0.5 * std::log(sj) -
                  (mb2 * mg2 - 2.0 * mb1 * G * mg1 + G * G) / (2.0 * sj) + mp1 - mp2;
    sum_w += mw;
  }
  g(mi::beta1) = g_b1;
  g(mi::beta2) = g_b2;
  g(mi::pi1(n)) = sum_w + cfg.a0 - 1.0;
  g(mi::pi2(n)) = static_cast<double>(n) - sum_w;
  return g;
}

double linear_response_11(const Eigen::MatrixXd& V, const Eigen::MatrixXd& H1) {
  const Eigen::Index dim = V.rows();
  const Eigen::MatrixXd A = V * H1 - Eigen::MatrixXd::Identity(dim, dim);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  if (!(lu.rcond() > 1e-14)) {
    throw Error(ErrorKind::DegenerateInference,
                "linear-response system (V H1 - I) is singular; inspect weights near the clamp bounds");
  }
  const Eigen::VectorXd x = lu.solve(V.col(0));
  if (!std::isfinite(x(0))) {
    throw Error(ErrorKind::DegenerateInference, "linear-response solve produced a non-finite value");
  }
  return -x(0);
}

namespace {

// Clamped weights are boundary optima, so their coordinates are skipped.
double free_gradient_norm(const VariationalState& s, const ModelParams& p, const SummaryDataset& d,
                          const ModelConfig& cfg) {
  const std::vector<double> grad = elbo_gradient(s, p, d, cfg);
  double gnorm = 0.0;
  for (std::size_t k = 0; k < grad.size(); ++k) {
    if (k >= 2 && k < grad.size() - 2 && (k - 2) % 3 == 2) {
      const double pi = s.pi_w[(k - 2) / 3];
      if (pi <= cfg.weight_floor * (1.0 + 1e-9) || pi >= 1.0 - cfg.weight_floor * (1.0 + 1e-9)) continue;
    }
    gnorm = std::max(gnorm, std::fabs(grad[k]));
  }
  return gnorm;
}

}  // namespace

VarianceCorrection corrected_variance(const VariationalState& s, const ModelParams& p,
                                      const SummaryDataset& d, const ModelConfig& cfg,
                                      const LrvbOptions& opt) {
  VarianceCorrection out;
  out.mfvb_variance = s.sigma_beta_sq;

  const double gnorm = free_gradient_norm(s, p, d, cfg);
  out.gradient_norm = gnorm;
  if (!(gnorm < opt.gradient_tol)) {
    out.stale = true;
    out.warnings.push_back("stale state: ELBO gradient norm " + std::to_string(gnorm) +
                           " exceeds " + std::to_string(opt.gradient_tol));
  }

  const LrvbMatrices mats = build_matrices(s, p, d, cfg);
  const double var = linear_response_11(mats.V, mats.H1);
  if (!std::isfinite(var) || !(var > 0.0)) {
    throw Error(ErrorKind::InferenceInvalid,
                "linear-response variance is not positive (" + std::to_string(var) + ")");
  }
  out.variance = var;
  return out;
}

CausalEstimate estimate_from_fit(const FitResult& fit, const SummaryDataset& data,
                                 const ModelConfig& cfg, const LrvbOptions& opt) {
  // The ELBO stopping rule leaves the beta block slightly behind the gamma
  // blocks; sweeping the E-step at fixed (tau^2, sigma^2) closes the gap.
  VariationalState s = fit.state;
  for (std::size_t k = 0; k < opt.polish_sweeps; ++k) {
    if (free_gradient_norm(s, fit.params, data, cfg) < opt.polish_tol) break;
    s = e_step(s, fit.params, data, cfg);
  }

  CausalEstimate est;
  est.beta_hat = s.mu_beta;
  est.se_mfvb = std::sqrt(s.sigma_beta_sq);
  est.weights = s.pi_w;
  est.tau_sq = fit.params.tau_sq;
  est.sigma_sq = fit.params.sigma_sq;
  est.iterations = fit.iterations;
  est.converged = fit.converged;
  est.elbo_trace = fit.elbo_trace;
  if (!fit.converged) {
    est.warnings.push_back("VEM did not converge within " + std::to_string(fit.iterations) + " iterations");
  }

  VarianceCorrection vc = corrected_variance(s, fit.params, data, cfg, opt);
  for (auto& w : vc.warnings) est.warnings.push_back(std::move(w));
  est.se = std::sqrt(vc.variance);
  if (est.se < 0.5 * est.se_mfvb) {
    est.warnings.push_back("corrected se below half the mean-field se");
  }
  est.z = est.beta_hat / est.se;
  est.p_value = special::two_sided_p(est.z);
  return est;
}

CausalEstimate estimate(const SummaryDataset& data, const ModelConfig& cfg, const LrvbOptions& opt) {
  const FitResult fit = fit_vem(data, cfg);
  return estimate_from_fit(fit, data, cfg, opt);
}

GaussianResponse gaussian_linear_response(const Eigen::VectorXd& mu0, const Eigen::MatrixXd& Sigma0) {
  const Eigen::Index k = mu0.size();
  if (Sigma0.rows() != k || Sigma0.cols() != k || k < 1) {
    throw Error(ErrorKind::InvalidInput, "Sigma0 must be square and match mu0");
  }
  const Eigen::MatrixXd R = Sigma0.inverse();
  // Mean-field optimum: q_i = N(mu0_i, 1 / R_ii).  Moments (E z_i, E z_i^2).
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  for (Eigen::Index i = 0; i < k; ++i) gaussian_block(V, 2 * i, mu0(i), 1.0 / R(i, i));
  // E_q[log p] = -1/2 sum_i R_ii (m_i2 - 2 mu_i m_i1 + mu_i^2)
  //              - sum_{i<l} R_il (m_i1 - mu_i)(m_l1 - mu_l)
  Eigen::MatrixXd H1 = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index l = 0; l < k; ++l)
      if (i != l) H1(2 * i, 2 * l) = -R(i, l);
  return {1.0 / R(0, 0), linear_response_11(V, H1)};
}

}  // namespace bwmr
