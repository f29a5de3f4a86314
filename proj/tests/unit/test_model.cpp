#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "bwmr/error.hpp"
#include "bwmr/model.hpp"
#include "bwmr/simulation.hpp"
#include "test_support.hpp"

using namespace bwmr;
using bwmr::test::make;

namespace {

const double kLog2Pi = std::log(2.0 * M_PI);

double log_normal(double x, double mean, double var) {
  return -0.5 * (kLog2Pi + std::log(var) + (x - mean) * (x - mean) / var);
}

double log_beta_pdf(double x, double a, double b) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

SummaryDataset negated(SummaryDataset d) {
  for (double& G : d.Gamma_hat) G = -G;
  return d;
}

// Sweeps the E-step at fixed params until the state stops moving.
VariationalState polish(VariationalState s, const ModelParams& p, const SummaryDataset& d, const ModelConfig& cfg) {
  for (int k = 0; k < 20000; ++k) {
    const VariationalState next = e_step(s, p, d, cfg);
    const bool same = std::fabs(next.mu_beta - s.mu_beta) < 1e-15 &&
                      std::fabs(next.sigma_beta_sq - s.sigma_beta_sq) < 1e-18;
    s = next;
    if (same) break;
  }
  return s;
}

// Plain Nelder-Mead, maximizing f.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                                double step, int iters) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
  std::vector<double> val(n + 1);
  for (std::size_t i = 0; i <= n; ++i) val[i] = -f(pts[i]);
  for (int it = 0; it < iters; ++it) {
    std::vector<std::size_t> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    const std::size_t best = idx[0], worst = idx[n], second = idx[n - 1];
    std::vector<double> c(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i)
      if (i != worst)
        for (std::size_t k = 0; k < n; ++k) c[k] += pts[i][k] / static_cast<double>(n);
    auto along = [&](double t) {
      std::vector<double> y(n);
      for (std::size_t k = 0; k < n; ++k) y[k] = c[k] + t * (pts[worst][k] - c[k]);
      return y;
    };
    const auto xr = along(-1.0);
    const double fr = -f(xr);
    if (fr < val[best]) {
      const auto xe = along(-2.0);
      const double fe = -f(xe);
      if (fe < fr) {
        pts[worst] = xe, val[worst] = fe;
      } else {
        pts[worst] = xr, val[worst] = fr;
      }
    } else if (fr < val[second]) {
      pts[worst] = xr, val[worst] = fr;
    } else {
      const auto xc = along(0.5);
      const double fc = -f(xc);
      if (fc < val[worst]) {
        pts[worst] = xc, val[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + 0.5 * (pts[i][k] - pts[best][k]);
          val[i] = -f(pts[i]);
        }
      }
    }
  }
  const auto best = std::min_element(val.begin(), val.end()) - val.begin();
  return pts[static_cast<std::size_t>(best)];
}

}  // namespace

// ------------------------------------------------------------------ init

TEST(InitState, ExactRatioGivesIvwSlope) {
  const auto d = make({1, 2}, {1, 1}, {0.5, 1.0}, {1, 1});
  const auto init = init_state(d, ModelConfig{});
  EXPECT_DOUBLE_EQ(init.state.mu_beta, 0.5);
  EXPECT_DOUBLE_EQ(init.state.sigma_beta_sq, 1.0);
  EXPECT_DOUBLE_EQ(init.params.sigma_sq, 2.5);
  EXPECT_DOUBLE_EQ(init.params.tau_sq, 1e-8);
  EXPECT_EQ(init.state.mu_gamma, d.gamma_hat);
}

TEST(InitState, PriorMeanWeightsAndBetaParameters) {
  std::mt19937_64 g(1);
  const auto d = test::random_dataset(g, 7);
  const auto init = init_state(d, ModelConfig{});
  for (double w : init.state.pi_w) EXPECT_NEAR(w, 100.0 / 101.0, 1e-15);
  EXPECT_NEAR(init.state.a, 100.0 + 7 * 100.0 / 101.0, 1e-12);
  EXPECT_NEAR(init.state.b, 8.0 - 7 * 100.0 / 101.0, 1e-12);
  for (std::size_t j = 0; j < d.size(); ++j) EXPECT_EQ(init.state.sigma_gamma_sq[j], d.sigma_x[j] * d.sigma_x[j]);
  EXPECT_EQ(check_state(init.state, ModelConfig{}), "");
}

TEST(InitState, ResidualVarianceForTau) {
  const auto d = make({1, 1, 1}, {1, 1, 1}, {0, 1, 2}, {1, 1, 1});
  const auto init = init_state(d, ModelConfig{});
  EXPECT_DOUBLE_EQ(init.state.mu_beta, 1.0);
  EXPECT_DOUBLE_EQ(init.params.tau_sq, 1.0);  // residuals (-1, 0, 1), divisor N-1
}

TEST(InitState, SignEquivariant) {
  std::mt19937_64 g(2);
  const auto d = test::random_dataset(g, 9);
  const auto a = init_state(d, ModelConfig{});
  const auto b = init_state(negated(d), ModelConfig{});
  EXPECT_EQ(a.state.mu_beta, -b.state.mu_beta);
  EXPECT_EQ(a.state.sigma_gamma_sq, b.state.sigma_gamma_sq);
  EXPECT_EQ(a.state.pi_w, b.state.pi_w);
  EXPECT_EQ(a.params.tau_sq, b.params.tau_sq);
}

TEST(InitState, RejectsTinyOrInvalidData) {
  EXPECT_THROW(
      {
        try {
          init_state(make({1}, {1}, {1}, {1}), ModelConfig{});
        } catch (const Error& e) {
          EXPECT_EQ(e.kind(), ErrorKind::DatasetTooSmall);
          throw;
        }
      },
      Error);
  EXPECT_THROW(init_state(make({1, 2}, {1, 0}, {1, 1}, {1, 1}), ModelConfig{}), Error);
  EXPECT_THROW(init_state(make({1, NAN}, {1, 1}, {1, 1}, {1, 1}), ModelConfig{}), Error);
}

TEST(ModelConfig, Validation) {
  ModelConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.a0 = 0.5;
  EXPECT_THROW(validate(cfg), Error);
  cfg = ModelConfig{};
  cfg.weight_floor = 0.5;
  EXPECT_THROW(validate(cfg), Error);
  cfg = ModelConfig{};
  cfg.max_iter = 0;
  EXPECT_THROW(validate(cfg), Error);
  cfg = ModelConfig{};
  cfg.sigma0_sq = 0.0;
  EXPECT_THROW(validate(cfg), Error);
}

// ------------------------------------------------------------------ E-step

TEST(EStep, ZeroWeightsLeaveBetaAtPrior) {
  std::mt19937_64 g(3);
  const ModelConfig cfg;
  const auto d = test::random_dataset(g, 5);
  auto s = test::random_state(g, d, cfg);
  std::fill(s.pi_w.begin(), s.pi_w.end(), 0.0);
  blocks::update_beta(s, test::random_params(g), d, cfg);
  EXPECT_EQ(s.sigma_beta_sq, cfg.sigma0_sq);
  EXPECT_EQ(s.mu_beta, 0.0);
}

TEST(EStep, KeepsStateInvariants) {
  std::mt19937_64 g(4);
  const ModelConfig cfg;
  for (int t = 0; t < 50; ++t) {
    const auto d = test::random_dataset(g, 3 + t % 20);
    const auto s = e_step(test::random_state(g, d, cfg), test::random_params(g), d, cfg);
    EXPECT_EQ(check_state(s, cfg), "");
    const double sum = std::accumulate(s.pi_w.begin(), s.pi_w.end(), 0.0);
    EXPECT_NEAR(s.a, cfg.a0 + sum, 1e-12);
    EXPECT_NEAR(s.b, static_cast<double>(d.size()) + 1.0 - sum, 1e-12);
  }
}

TEST(EStep, SignSymmetryIsBitExact) {
  std::mt19937_64 g(5);
  const ModelConfig cfg;
  const auto d = test::random_dataset(g, 11);
  const auto p = test::random_params(g);
  auto s = test::random_state(g, d, cfg);
  auto m = s;
  m.mu_beta = -m.mu_beta;
  const auto a = e_step(s, p, d, cfg);
  const auto b = e_step(m, p, negated(d), cfg);
  EXPECT_EQ(a.mu_beta, -b.mu_beta);
  EXPECT_EQ(a.sigma_beta_sq, b.sigma_beta_sq);
  EXPECT_EQ(a.mu_gamma, b.mu_gamma);
  EXPECT_EQ(a.sigma_gamma_sq, b.sigma_gamma_sq);
  EXPECT_EQ(a.pi_w, b.pi_w);
  EXPECT_EQ(compute_elbo(a, p, d, cfg), compute_elbo(b, p, negated(d), cfg));
}

TEST(EStep, EachBlockIsAnAscentStep) {
  std::mt19937_64 g(6);
  const ModelConfig cfg;
  for (int t = 0; t < 200; ++t) {
    const auto d = test::random_dataset(g, 2 + t % 12);
    const auto p = test::random_params(g);
    auto s = test::random_state(g, d, cfg);
    const std::size_t j = static_cast<std::size_t>(t) % d.size();
    double before = compute_elbo(s, p, d, cfg);
    blocks::update_beta(s, p, d, cfg);
    double after = compute_elbo(s, p, d, cfg);
    EXPECT_GE(after, before - 1e-9 * std::fabs(before)) << "beta, trial " << t;
    before = after;
    blocks::update_gamma(s, j, p, d);
    after = compute_elbo(s, p, d, cfg);
    EXPECT_GE(after, before - 1e-9 * std::fabs(before)) << "gamma, trial " << t;
    before = after;
    blocks::update_weight(s, j, p, d, cfg);
    after = compute_elbo(s, p, d, cfg);
    EXPECT_GE(after, before - 1e-9 * std::fabs(before)) << "weight, trial " << t;
    before = after;
    blocks::update_pi1(s, cfg);
    after = compute_elbo(s, p, d, cfg);
    EXPECT_GE(after, before - 1e-9 * std::fabs(before)) << "pi1, trial " << t;
  }
}

TEST(EStep, NonFiniteInputRaisesNumericalFailureWithIteration) {
  std::mt19937_64 g(7);
  const ModelConfig cfg;
  const auto d = test::random_dataset(g, 4);
  auto s = test::random_state(g, d, cfg);
  s.mu_gamma[0] = NAN;
  try {
    e_step(s, test::random_params(g), d, cfg, 17);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NumericalFailure);
    EXPECT_EQ(e.iteration(), 17);
  }
}

// ------------------------------------------------------------------ M-step

TEST(MStep, SigmaIsMeanSecondMoment) {
  const auto d = make({1, 1}, {1, 1}, {1, 1}, {1, 1});
  VariationalState s;
  s.mu_gamma = {1, 1};
  s.sigma_gamma_sq = {0, 0};
  s.pi_w = {0.5, 0.5};
  s.a = 101;
  s.b = 2;
  EXPECT_DOUBLE_EQ(m_step(s, {0.1, 1.0}, d).sigma_sq, 1.0);
}

TEST(MStep, HomogeneousTauFixedPointMaximizesElboTerm) {
  // mu_beta = 0 makes every residual moment R = Gamma_hat^2 + sigma_beta^2 E[gamma^2].
  const double sy2 = 0.04;
  const auto d = make({1, -1, 1, -1}, {0.1, 0.1, 0.1, 0.1}, {0.4, -0.4, -0.4, 0.4}, {0.2, 0.2, 0.2, 0.2});
  VariationalState s;
  s.mu_beta = 0.0;
  s.sigma_beta_sq = 1e-6;
  s.mu_gamma = {1, -1, 1, -1};
  s.sigma_gamma_sq = {1e-4, 1e-4, 1e-4, 1e-4};
  s.pi_w = {0.7, 0.7, 0.7, 0.7};
  s.a = 100 + 2.8;
  s.b = 5 - 2.8;
  const double R = 0.16 + 1e-6 * (1.0 + 1e-4);
  ModelParams p{0.5, 1.0};
  for (int k = 0; k < 5000; ++k) p = m_step(s, p, d);
  EXPECT_NEAR(p.tau_sq, R - sy2, 1e-9);

  // independent: golden-section search of the exact ELBO in tau^2
  const ModelConfig cfg;
  auto f = [&](double t) { return compute_elbo(s, {t, p.sigma_sq}, d, cfg); };
  double lo = 0.0, hi = 1.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int k = 0; k < 200; ++k) {
    const double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    if (f(x1) < f(x2)) {
      lo = x1;
    } else {
      hi = x2;
    }
  }
  EXPECT_NEAR(p.tau_sq, 0.5 * (lo + hi), 1e-7);
}

TEST(MStep, TauFloorWhenResidualsBelowNoise) {
  const auto d = make({1, 1}, {0.1, 0.1}, {0.0, 0.0}, {1.0, 1.0});
  VariationalState s;
  s.mu_beta = 0.0;
  s.sigma_beta_sq = 1e-6;
  s.mu_gamma = {1, 1};
  s.sigma_gamma_sq = {1e-4, 1e-4};
  s.pi_w = {0.9, 0.9};
  ModelParams p{0.3, 1.0};
  for (int k = 0; k < 3000; ++k) p = m_step(s, p, d);
  EXPECT_EQ(p.tau_sq, 1e-8);
}

TEST(MStep, NeverDecreasesElbo) {
  std::mt19937_64 g(8);
  const ModelConfig cfg;
  for (int t = 0; t < 100; ++t) {
    const auto d = test::random_dataset(g, 2 + t % 30);
    const auto s = test::random_state(g, d, cfg);
    const auto p = test::random_params(g);
    const double before = compute_elbo(s, p, d, cfg);
    const double after = compute_elbo(s, m_step(s, p, d, cfg), d, cfg);
    EXPECT_GE(after, before - 1e-9 * std::fabs(before)) << t;
  }
}

// ------------------------------------------------------------------ ELBO

TEST(Elbo, MonteCarloOracleOverFactorizedQ) {
  std::mt19937_64 g(9);
  const ModelConfig cfg;
  const auto d = test::random_dataset(g, 3, 0.4, 0.05, 0.1, 0.2);
  const auto fit = fit_vem(d, cfg);
  const auto& s = fit.state;
  const auto& p = fit.params;
  const std::size_t n = d.size();

  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::gamma_distribution<double> ga(s.a, 1.0), gb(s.b, 1.0);
  const int draws = 1000000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double beta = s.mu_beta + std::sqrt(s.sigma_beta_sq) * z(g);
    const double x = ga(g), y = gb(g);
    const double pi1 = x / (x + y);
    double lp = log_normal(beta, 0.0, cfg.sigma0_sq) + log_beta_pdf(pi1, cfg.a0, 1.0);
    double lq = log_normal(beta, s.mu_beta, s.sigma_beta_sq) + log_beta_pdf(pi1, s.a, s.b);
    for (std::size_t j = 0; j < n; ++j) {
      const double gam = s.mu_gamma[j] + std::sqrt(s.sigma_gamma_sq[j]) * z(g);
      const bool w = u(g) < s.pi_w[j];
      lp += log_normal(d.gamma_hat[j], gam, d.sigma_x[j] * d.sigma_x[j]) + log_normal(gam, 0.0, p.sigma_sq);
      if (w) lp += log_normal(d.Gamma_hat[j], beta * gam, d.sigma_y[j] * d.sigma_y[j] + p.tau_sq);
      lp += w ? std::log(pi1) : std::log1p(-pi1);
      lq += log_normal(gam, s.mu_gamma[j], s.sigma_gamma_sq[j]) + (w ? std::log(s.pi_w[j]) : std::log1p(-s.pi_w[j]));
    }
    sum += lp - lq;
    sum2 += (lp - lq) * (lp - lq);
  }
  const double mc = sum / draws;
  const double mc_se = std::sqrt((sum2 / draws - mc * mc) / draws);

  // constants left out of compute_elbo
  double dropped = std::log(cfg.a0) - 0.5 * std::log(cfg.sigma0_sq) + 0.5;
  for (std::size_t j = 0; j < n; ++j) dropped += -0.5 * kLog2Pi - std::log(d.sigma_x[j]) + 0.5;
  const double exact = compute_elbo(s, p, d, cfg) + dropped;
  EXPECT_LT(std::fabs(mc - exact) / std::fabs(exact), 1e-2);
  EXPECT_LT(std::fabs(mc - exact), 6.0 * mc_se + 1e-9);
}

TEST(Elbo, NonPositiveVarianceIsNumericalFailure) {
  std::mt19937_64 g(10);
  const ModelConfig cfg;
  const auto d = test::random_dataset(g, 3);
  auto s = test::random_state(g, d, cfg);
  s.sigma_gamma_sq[1] = 0.0;
  try {
    compute_elbo(s, test::random_params(g), d, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NumericalFailure);
  }
}

// ------------------------------------------------------------------ fit

TEST(FitVem, TraceIsMonotoneAndStateValid) {
  std::mt19937_64 g(11);
  const ModelConfig cfg;
  for (int t = 0; t < 20; ++t) {
    const auto d = test::random_dataset(g, 5 + 10 * t);
    const auto fit = fit_vem(d, cfg);
    EXPECT_TRUE(fit.converged);
    EXPECT_EQ(static_cast<int>(fit.elbo_trace.size()), fit.iterations);
    for (std::size_t k = 1; k < fit.elbo_trace.size(); ++k) EXPECT_GE(fit.elbo_trace[k] - fit.elbo_trace[k - 1], -1e-8);
    EXPECT_EQ(check_state(fit.state, cfg), "");
    EXPECT_GE(fit.params.tau_sq, cfg.tau_sq_floor);
  }
}

TEST(FitVem, ZeroOutcomeEffectsGiveZeroBeta) {
  std::mt19937_64 g(12);
  auto d = test::random_dataset(g, 30);
  std::fill(d.Gamma_hat.begin(), d.Gamma_hat.end(), 0.0);
  EXPECT_LT(std::fabs(fit_vem(d).state.mu_beta), 1e-3);
}

TEST(FitVem, IterationCapSetsFlagOnly) {
  std::mt19937_64 g(13);
  ModelConfig cfg;
  cfg.max_iter = 2;
  const auto fit = fit_vem(test::random_dataset(g, 40), cfg);
  EXPECT_FALSE(fit.converged);
  EXPECT_EQ(fit.iterations, 2);
}

TEST(FitVem, SmallNFixedPointMatchesDirectMaximizationAndQuadrature) {
  // N = 1, w fixed at 1, tau^2 = 0; broad priors on beta and gamma
  ModelConfig cfg;
  cfg.sigma0_sq = 100.0;
  const ModelParams p{0.0, 100.0};
  const auto d = make({1.0}, {0.05}, {0.5}, {0.05});
  VariationalState s;
  s.mu_beta = 0.1;
  s.sigma_beta_sq = 1.0;
  s.mu_gamma = {1.0};
  s.sigma_gamma_sq = {0.01};
  s.pi_w = {1.0 - cfg.weight_floor};
  s.a = cfg.a0 + s.pi_w[0];
  s.b = 2.0 - s.pi_w[0];
  for (int k = 0; k < 5000; ++k) {
    blocks::update_beta(s, p, d, cfg);
    blocks::update_gamma(s, 0, p, d);
  }

  auto elbo4 = [&](const std::vector<double>& x) {
    VariationalState t = s;
    t.mu_beta = x[0];
    t.sigma_beta_sq = std::exp(x[1]);
    t.mu_gamma[0] = x[2];
    t.sigma_gamma_sq[0] = std::exp(x[3]);
    return compute_elbo(t, p, d, cfg);
  };
  auto x = nelder_mead(elbo4, {0.0, std::log(0.5), 0.5, std::log(0.5)}, 0.3, 4000);
  x = nelder_mead(elbo4, x, 0.01, 4000);
  EXPECT_NEAR(x[0], s.mu_beta, 1e-5);
  EXPECT_NEAR(std::exp(x[1]), s.sigma_beta_sq, 1e-6);
  EXPECT_NEAR(x[2], s.mu_gamma[0], 1e-5);
  EXPECT_LE(elbo4(x), compute_elbo(s, p, d, cfg) + 1e-10);

  // dense grid over (beta, gamma) of the exact joint
  double z = 0.0, m1 = 0.0;
  const int nb = 1601, ng = 1601;
  for (int i = 0; i < nb; ++i) {
    const double beta = 0.1 + 0.8 * i / (nb - 1.0);
    for (int k = 0; k < ng; ++k) {
      const double gam = 0.7 + 0.6 * k / (ng - 1.0);
      const double lj = log_normal(d.gamma_hat[0], gam, 0.0025) + log_normal(d.Gamma_hat[0], beta * gam, 0.0025) +
                        log_normal(gam, 0.0, p.sigma_sq) + log_normal(beta, 0.0, cfg.sigma0_sq);
      const double w = std::exp(lj);
      z += w;
      m1 += w * beta;
    }
  }
  EXPECT_NEAR(s.mu_beta, m1 / z, 5e-3);
}

TEST(FitVem, CaseOneMeanWithinTolerance) {
  sim::SimulationSpec spec;
  spec.regime = sim::Regime::Case1;
  spec.beta = 0.5;
  spec.tau = 0.1;
  spec.n_snps = 300;
  double sum = 0.0;
  for (int r = 0; r < 50; ++r) {
    Rng rng(replicate_seed(101, static_cast<std::uint64_t>(r)));
    sum += fit_vem(sim::generate(spec, rng).data).state.mu_beta;
  }
  EXPECT_NEAR(sum / 50.0, 0.5, 0.05);
}

// ------------------------------------------------------------------ properties

TEST(Properties, PermutationInvarianceIsExact) {
  std::mt19937_64 g(14);
  for (int t = 0; t < 10; ++t) {
    const auto d = test::random_dataset(g, 10 + 7 * t);
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), g);
    const auto a = fit_vem(d);
    const auto b = fit_vem(permuted(d, order));
    EXPECT_EQ(a.state.mu_beta, b.state.mu_beta);
    EXPECT_EQ(a.state.sigma_beta_sq, b.state.sigma_beta_sq);
    EXPECT_EQ(a.params.tau_sq, b.params.tau_sq);
    EXPECT_EQ(a.params.sigma_sq, b.params.sigma_sq);
    EXPECT_EQ(a.iterations, b.iterations);
    for (std::size_t j = 0; j < d.size(); ++j) EXPECT_EQ(a.state.pi_w[order[j]], b.state.pi_w[j]);
  }
}

TEST(Properties, SignEquivariance) {
  std::mt19937_64 g(15);
  for (int t = 0; t < 10; ++t) {
    const auto d = test::random_dataset(g, 20 + 5 * t);
    const auto a = fit_vem(d);
    const auto b = fit_vem(negated(d));
    EXPECT_NEAR(a.state.mu_beta, -b.state.mu_beta, 1e-10);
    EXPECT_EQ(a.state.pi_w, b.state.pi_w);
  }
}

TEST(Properties, ApproximateScaleEquivariance) {
  std::mt19937_64 g(16);
  for (double c : {0.5, 2.0, 10.0}) {
    const auto d = test::random_dataset(g, 50, 0.6, 0.05);
    auto scaled = d;
    for (std::size_t j = 0; j < d.size(); ++j) {
      scaled.Gamma_hat[j] *= c;
      scaled.sigma_y[j] *= c;
    }
    const double a = fit_vem(d).state.mu_beta;
    const double b = fit_vem(scaled).state.mu_beta;
    EXPECT_NEAR(b / (c * a), 1.0, 1e-3) << "c = " << c;
  }
}

TEST(Properties, CorruptedSnpsAreDownweighted) {
  sim::SimulationSpec spec;
  spec.regime = sim::Regime::Case2;
  spec.beta = 0.2;
  spec.n_snps = 100;
  Rng rng(77);
  const auto simd = sim::generate(spec, rng);
  const auto fit = fit_vem(simd.data);
  double wc = 0.0, wn = 0.0;
  int nc = 0, nn = 0;
  for (std::size_t j = 0; j < simd.data.size(); ++j) {
    (simd.truth.corrupted[j] ? wc : wn) += fit.state.pi_w[j];
    ++(simd.truth.corrupted[j] ? nc : nn);
  }
  EXPECT_EQ(nc, 20);
  EXPECT_LT(wc / nc, wn / nn);
}

TEST(Properties, CoordinateOptimalityOfConvergedState) {
  std::mt19937_64 g(17);
  const ModelConfig cfg;
  for (int t = 0; t < 5; ++t) {
    const auto d = test::random_dataset(g, 8 + 4 * t);
    const auto fit = fit_vem(d, cfg);
    const auto s = polish(fit.state, fit.params, d, cfg);
    const double base = compute_elbo(s, fit.params, d, cfg);
    const auto eta = pack_eta(s);
    for (std::size_t k = 0; k < eta.size(); ++k) {
      for (double h : {-1e-3, 1e-3}) {
        auto e = eta;
        e[k] += h;
        const bool pi_coord = k >= 2 && k < eta.size() - 2 && (k - 2) % 3 == 2;
        if (pi_coord) e[k] = std::clamp(e[k], cfg.weight_floor, 1.0 - cfg.weight_floor);
        if ((k == 1 || (k >= 2 && k < eta.size() - 2 && (k - 2) % 3 == 1)) && e[k] <= 0.0) continue;
        const double v = compute_elbo(unpack_eta(e), fit.params, d, cfg);
        EXPECT_LE(v - base, 1e-8) << "coordinate " << k << " step " << h;
      }
    }
  }
}
