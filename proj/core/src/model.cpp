#include "bwmr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bwmr/detail/sum.hpp"
#include "bwmr/error.hpp"
#include "bwmr/special.hpp"

namespace bwmr {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

using detail::ordered_sum;

double s_of(const SummaryDataset& d, std::size_t j, double tau_sq) {
  return d.sigma_y[j] * d.sigma_y[j] + tau_sq;
}

// E_q[(Gamma_hat_j - beta gamma_j)^2]
double residual_moment(const VariationalState& s, const SummaryDataset& d, std::size_t j) {
  const double mb2 = s.mu_beta * s.mu_beta + s.sigma_beta_sq;
  const double mg2 = s.mu_gamma[j] * s.mu_gamma[j] + s.sigma_gamma_sq[j];
  const double G = d.Gamma_hat[j];
  return mb2 * mg2 - 2.0 * s.mu_beta * s.mu_gamma[j] * G + G * G;
}

void require_finite(double x, const char* what, long iteration) {
  if (!std::isfinite(x)) {
    std::string msg = std::string("non-finite ") + what;
    if (iteration >= 0) msg += " at iteration " + std::to_string(iteration);
    throw Error(ErrorKind::NumericalFailure, msg, iteration);
  }
}

void require_size(const VariationalState& s, const SummaryDataset& d) {
  const std::size_t n = d.size();
  if (s.mu_gamma.size() != n || s.sigma_gamma_sq.size() != n || s.pi_w.size() != n) {
    throw Error(ErrorKind::InvalidInput, "variational state does not match dataset size");
  }
}

}  // namespace

void validate(const ModelConfig& cfg) {
  if (!(cfg.sigma0_sq > 0.0) || !std::isfinite(cfg.sigma0_sq))
    throw Error(ErrorKind::InvalidInput, "sigma0_sq must be > 0");
  if (!(cfg.a0 >= 1.0) || !std::isfinite(cfg.a0))
    throw Error(ErrorKind::InvalidInput, "a0 must be >= 1");
  if (cfg.max_iter < 1) throw Error(ErrorKind::InvalidInput, "max_iter must be >= 1");
  if (!(cfg.weight_floor > 0.0 && cfg.weight_floor < 0.5))
    throw Error(ErrorKind::InvalidInput, "weight_floor must lie in (0, 0.5)");
  if (!(cfg.elbo_tol >= 0.0)) throw Error(ErrorKind::InvalidInput, "elbo_tol must be >= 0");
  if (!(cfg.tau_sq_floor >= 0.0)) throw Error(ErrorKind::InvalidInput, "tau_sq_floor must be >= 0");
}

InitResult init_state(const SummaryDataset& data, const ModelConfig& cfg) {
  validate(data);
  validate(cfg);
  const std::size_t n = data.size();
  if (n < 2) {
    throw Error(ErrorKind::DatasetTooSmall, "need at least 2 instruments, got " + std::to_string(n));
  }

  std::vector<double> t1(n), t2(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = 1.0 / (data.sigma_y[j] * data.sigma_y[j]);
    t1[j] = data.Gamma_hat[j] * data.gamma_hat[j] * w;
    t2[j] = data.gamma_hat[j] * data.gamma_hat[j] * w;
  }
  const double num = ordered_sum(t1);
  const double den = ordered_sum(t2);

  InitResult r;
  VariationalState& s = r.state;
  s.mu_beta = den > 0.0 ? num / den : 0.0;
  s.sigma_beta_sq = 1.0;
  s.mu_gamma = data.gamma_hat;
  s.sigma_gamma_sq.resize(n);
  for (std::size_t j = 0; j < n; ++j) s.sigma_gamma_sq[j] = data.sigma_x[j] * data.sigma_x[j];
  const double pi0 = cfg.a0 / (cfg.a0 + 1.0);
  s.pi_w.assign(n, pi0);
  std::vector<double> tp(s.pi_w);
  const double spi = ordered_sum(tp);
  s.a = cfg.a0 + spi;
  s.b = static_cast<double>(n) + 1.0 - spi;

  for (std::size_t j = 0; j < n; ++j) t1[j] = data.gamma_hat[j] * data.gamma_hat[j];
  r.params.sigma_sq = ordered_sum(t1) / static_cast<double>(n);
  if (!(r.params.sigma_sq > 0.0)) r.params.sigma_sq = 1.0;  // every gamma_hat is 0

  for (std::size_t j = 0; j < n; ++j) t1[j] = data.Gamma_hat[j] - s.mu_beta * data.gamma_hat[j];
  std::vector<double> tmp(t1);
  const double mean = ordered_sum(tmp) / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) t1[j] = (t1[j] - mean) * (t1[j] - mean);
  const double var = ordered_sum(t1) / static_cast<double>(n - 1);
  r.params.tau_sq = std::max(var, cfg.tau_sq_floor);
  return r;
}

namespace blocks {

void update_beta(VariationalState& s, const ModelParams& p, const SummaryDataset& d,
                 const ModelConfig& cfg) {
  const std::size_t n = d.size();
  std::vector<double> tq(n), tl(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double sj = s_of(d, j, p.tau_sq);
    const double mg2 = s.mu_gamma[j] * s.mu_gamma[j] + s.sigma_gamma_sq[j];
    tq[j] = s.pi_w[j] * mg2 / sj;
    tl[j] = s.pi_w[j] * s.mu_gamma[j] * d.Gamma_hat[j] / sj;
  }
  const double prec = 1.0 / cfg.sigma0_sq + ordered_sum(tq);
  s.sigma_beta_sq = 1.0 / prec;
  s.mu_beta = s.sigma_beta_sq * ordered_sum(tl);
}

void update_gamma(VariationalState& s, std::size_t j, const ModelParams& p,
                  const SummaryDataset& d) {
  const double sj = s_of(d, j, p.tau_sq);
  const double sx2 = d.sigma_x[j] * d.sigma_x[j];
  const double mb2 = s.mu_beta * s.mu_beta + s.sigma_beta_sq;
  const double prec = 1.0 / sx2 + s.pi_w[j] * mb2 / sj + 1.0 / p.sigma_sq;
  s.sigma_gamma_sq[j] = 1.0 / prec;
  s.mu_gamma[j] =
      s.sigma_gamma_sq[j] * (d.gamma_hat[j] / sx2 + s.pi_w[j] * s.mu_beta * d.Gamma_hat[j] / sj);
}

void update_pi1(VariationalState& s, const ModelConfig& cfg) {
  std::vector<double> tp(s.pi_w);
  const double spi = ordered_sum(tp);
  s.a = cfg.a0 + spi;
  s.b = static_cast<double>(s.pi_w.size()) + 1.0 - spi;
}

void update_weight(VariationalState& s, std::size_t j, const ModelParams& p,
                   const SummaryDataset& d, const ModelConfig& cfg) {
  const double psi_ab = special::digamma(s.a + s.b);
  const double log_q0 = special::digamma(s.b) - psi_ab;
  const double sj = s_of(d, j, p.tau_sq);
  const double log_q1 = -kHalfLog2Pi - 0.5 * std::log(sj) - residual_moment(s, d, j) / (2.0 * sj) +
                        special::digamma(s.a) - psi_ab;
  double pi = 1.0 / (1.0 + std::exp(log_q0 - log_q1));
  pi = std::clamp(pi, cfg.weight_floor, 1.0 - cfg.weight_floor);
  s.pi_w[j] = pi;
}

}  // namespace blocks

VariationalState e_step(const VariationalState& state, const ModelParams& params,
                        const SummaryDataset& data, const ModelConfig& cfg, long iteration) {
  require_size(state, data);
  const std::size_t n = data.size();
  VariationalState s = state;

  blocks::update_beta(s, params, data, cfg);
  require_finite(s.mu_beta, "mu_beta", iteration);
  require_finite(s.sigma_beta_sq, "sigma_beta_sq", iteration);

  for (std::size_t j = 0; j < n; ++j) {
    blocks::update_gamma(s, j, params, data);
    require_finite(s.mu_gamma[j], "mu_gamma", iteration);
    require_finite(s.sigma_gamma_sq[j], "sigma_gamma_sq", iteration);
  }

  // The weight blocks read digamma(a), digamma(b) of the current (a, b);
  // hoisting them out of update_weight keeps the sweep O(N).
  const double psi_ab = special::digamma(s.a + s.b);
  const double log_q0 = special::digamma(s.b) - psi_ab;
  const double psi_a = special::digamma(s.a) - psi_ab;
  const double mb2 = s.mu_beta * s.mu_beta + s.sigma_beta_sq;
  for (std::size_t j = 0; j < n; ++j) {
    const double sj = s_of(data, j, params.tau_sq);
    const double mg2 = s.mu_gamma[j] * s.mu_gamma[j] + s.sigma_gamma_sq[j];
    const double G = data.Gamma_hat[j];
    const double R = mb2 * mg2 - 2.0 * s.mu_beta * s.mu_gamma[j] * G + G * G;
    const double log_q1 = -kHalfLog2Pi - 0.5 * std::log(sj) - R / (2.0 * sj) + psi_a;
    const double pi = 1.0 / (1.0 + std::exp(log_q0 - log_q1));
    require_finite(pi, "weight", iteration);
    s.pi_w[j] = std::clamp(pi, cfg.weight_floor, 1.0 - cfg.weight_floor);
  }

  blocks::update_pi1(s, cfg);
  return s;
}

ModelParams m_step(const VariationalState& state, const ModelParams& params,
                   const SummaryDataset& data, const ModelConfig& cfg) {
  require_size(state, data);
  const std::size_t n = data.size();
  std::vector<double> tg(n), tn(n), td(n);
  for (std::size_t j = 0; j < n; ++j) {
    tg[j] = state.mu_gamma[j] * state.mu_gamma[j] + state.sigma_gamma_sq[j];
    const double sj = s_of(data, j, params.tau_sq);
    const double R = residual_moment(state, data, j);
    tn[j] = state.pi_w[j] * R * params.tau_sq * params.tau_sq / (sj * sj);
    td[j] = state.pi_w[j] / sj;
  }
  ModelParams out;
  out.sigma_sq = ordered_sum(tg) / static_cast<double>(n);
  const double num = ordered_sum(tn);
  const double den = ordered_sum(td);
  out.tau_sq = std::max(std::sqrt(num / den), cfg.tau_sq_floor);
  if (!std::isfinite(out.sigma_sq) || !(out.sigma_sq > 0.0) || !std::isfinite(out.tau_sq)) {
    throw Error(ErrorKind::NumericalFailure, "M-step produced an invalid variance component");
  }
  return out;
}

ModelParams m_step(const VariationalState& state, const ModelParams& params,
                   const SummaryDataset& data) {
  return m_step(state, params, data, ModelConfig{});
}

double compute_elbo(const VariationalState& s, const ModelParams& p, const SummaryDataset& d,
                    const ModelConfig& cfg) {
  require_size(s, d);
  const std::size_t n = d.size();
  if (!(s.sigma_beta_sq > 0.0) || !(p.sigma_sq > 0.0) || !(p.tau_sq >= 0.0)) {
    throw Error(ErrorKind::NumericalFailure, "log of non-positive variance in ELBO");
  }
  const double psi_ab = special::digamma(s.a + s.b);
  const double e_log_pi = special::digamma(s.a) - psi_ab;
  const double e_log_1mpi = special::digamma(s.b) - psi_ab;
  const double mb2 = s.mu_beta * s.mu_beta + s.sigma_beta_sq;

  std::vector<double> terms(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!(s.sigma_gamma_sq[j] > 0.0)) {
      throw Error(ErrorKind::NumericalFailure, "log of non-positive variance in ELBO");
    }
    const double sx2 = d.sigma_x[j] * d.sigma_x[j];
    const double sj = s_of(d, j, p.tau_sq);
    const double mg = s.mu_gamma[j];
    const double vg = s.sigma_gamma_sq[j];
    const double mg2 = mg * mg + vg;
    const double R = residual_moment(s, d, j);
    const double pi = s.pi_w[j];
    const double dg = d.gamma_hat[j] - mg;

    double t = -(dg * dg + vg) / (2.0 * sx2);
    t += pi * (-kHalfLog2Pi - 0.5 * std::log(sj) - R / (2.0 * sj));
    t += -0.5 * std::log(p.sigma_sq) - mg2 / (2.0 * p.sigma_sq);
    t += pi * e_log_pi + (1.0 - pi) * e_log_1mpi;
    t += 0.5 * std::log(vg);
    t -= pi * std::log(pi) + (1.0 - pi) * std::log1p(-pi);
    terms[j] = t;
  }
  double elbo = ordered_sum(terms);
  elbo += -mb2 / (2.0 * cfg.sigma0_sq);
  elbo += (cfg.a0 - 1.0) * e_log_pi;
  elbo += 0.5 * std::log(s.sigma_beta_sq);
  elbo -= (s.a - 1.0) * e_log_pi + (s.b - 1.0) * e_log_1mpi - special::log_beta(s.a, s.b);
  if (!std::isfinite(elbo)) throw Error(ErrorKind::NumericalFailure, "non-finite ELBO");
  return elbo;
}

FitResult fit_vem(const SummaryDataset& data, const ModelConfig& cfg) {
  InitResult init = init_state(data, cfg);
  FitResult r;
  r.state = std::move(init.state);
  r.params = init.params;
  double prev = compute_elbo(r.state, r.params, data, cfg);
  r.elbo_trace.reserve(64);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    r.state = e_step(r.state, r.params, data, cfg, it);
    r.params = m_step(r.state, r.params, data, cfg);
    double elbo;
    try {
      elbo = compute_elbo(r.state, r.params, data, cfg);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " at iteration " + std::to_string(it), it);
    }
    r.elbo_trace.push_back(elbo);
    r.iterations = it;
    if (std::fabs(elbo - prev) / (std::fabs(elbo) + 1.0) < cfg.elbo_tol) {
      r.converged = true;
      break;
    }
    prev = elbo;
  }
  return r;
}

std::vector<double> elbo_gradient(const VariationalState& s, const ModelParams& p,
                                  const SummaryDataset& d, const ModelConfig& cfg) {
  require_size(s, d);
  const std::size_t n = d.size();
  std::vector<double> g(3 * n + 4, 0.0);
  const double mb2 = s.mu_beta * s.mu_beta + s.sigma_beta_sq;
  const double psi_a = special::digamma(s.a);
  const double psi_b = special::digamma(s.b);

  std::vector<double> t_mu(n), t_var(n), t_pi(s.pi_w);
  for (std::size_t j = 0; j < n; ++j) {
    const double sj = s_of(d, j, p.tau_sq);
    const double sx2 = d.sigma_x[j] * d.sigma_x[j];
    const double mg = s.mu_gamma[j];
    const double mg2 = mg * mg + s.sigma_gamma_sq[j];
    const double G = d.Gamma_hat[j];
    const double pi = s.pi_w[j];
    const double R = residual_moment(s, d, j);

    t_mu[j] = -pi * (s.mu_beta * mg2 - mg * G) / sj;
    t_var[j] = -pi * mg2 / (2.0 * sj);

    g[2 + 3 * j] = -(mg - d.gamma_hat[j]) / sx2 - pi * (mg * mb2 - s.mu_beta * G) / sj -
                   mg / p.sigma_sq;
    g[3 + 3 * j] = -1.0 / (2.0 * sx2) - pi * mb2 / (2.0 * sj) - 1.0 / (2.0 * p.sigma_sq) +
                   1.0 / (2.0 * s.sigma_gamma_sq[j]);
    g[4 + 3 * j] = -kHalfLog2Pi - 0.5 * std::log(sj) - R / (2.0 * sj) + psi_a - psi_b +
                   std::log1p(-pi) - std::log(pi);
  }
  g[0] = ordered_sum(t_mu) - s.mu_beta / cfg.sigma0_sq;
  g[1] = ordered_sum(t_var) - 1.0 / (2.0 * cfg.sigma0_sq) + 1.0 / (2.0 * s.sigma_beta_sq);

  const double spi = ordered_sum(t_pi);
  const double N = static_cast<double>(n);
  const double tab = special::trigamma(s.a + s.b) * (s.a + s.b - 1.0 - N - cfg.a0);
  g[3 * n + 2] = special::trigamma(s.a) * (cfg.a0 - s.a + spi) + tab;
  g[3 * n + 3] = special::trigamma(s.b) * (N + 1.0 - s.b - spi) + tab;
  return g;
}

std::vector<double> pack_eta(const VariationalState& s) {
  const std::size_t n = s.size();
  std::vector<double> eta(3 * n + 4);
  eta[0] = s.mu_beta;
  eta[1] = s.sigma_beta_sq;
  for (std::size_t j = 0; j < n; ++j) {
    eta[2 + 3 * j] = s.mu_gamma[j];
    eta[3 + 3 * j] = s.sigma_gamma_sq[j];
    eta[4 + 3 * j] = s.pi_w[j];
  }
  eta[3 * n + 2] = s.a;
  eta[3 * n + 3] = s.b;
  return eta;
}

VariationalState unpack_eta(const std::vector<double>& eta) {
  if (eta.size() < 4 || (eta.size() - 4) % 3 != 0) {
    throw Error(ErrorKind::InvalidInput, "eta length must be 3N + 4");
  }
  const std::size_t n = (eta.size() - 4) / 3;
  VariationalState s;
  s.mu_beta = eta[0];
  s.sigma_beta_sq = eta[1];
  s.mu_gamma.resize(n);
  s.sigma_gamma_sq.resize(n);
  s.pi_w.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    s.mu_gamma[j] = eta[2 + 3 * j];
    s.sigma_gamma_sq[j] = eta[3 + 3 * j];
    s.pi_w[j] = eta[4 + 3 * j];
  }
  s.a = eta[3 * n + 2];
  s.b = eta[3 * n + 3];
  return s;
}

std::string check_state(const VariationalState& s, const ModelConfig& cfg, double tol) {
  if (!(s.sigma_beta_sq > 0.0)) return "sigma_beta_sq not positive";
  double spi = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (!(s.sigma_gamma_sq[j] > 0.0)) return "sigma_gamma_sq[" + std::to_string(j) + "] not positive";
    if (s.pi_w[j] < cfg.weight_floor || s.pi_w[j] > 1.0 - cfg.weight_floor)
      return "pi_w[" + std::to_string(j) + "] outside clamp bounds";
    spi += s.pi_w[j];
  }
  const double N = static_cast<double>(s.size());
  if (std::fabs(s.a - (cfg.a0 + spi)) > tol * (1.0 + s.a)) return "a != a0 + sum(pi_w)";
  if (std::fabs(s.b - (N + 1.0 - spi)) > tol * (1.0 + s.b)) return "b != N + 1 - sum(pi_w)";
  return {};
}

}  // namespace bwmr
