#include "bwmr/baselines.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "bwmr/error.hpp"
#include "bwmr/special.hpp"

namespace bwmr::baselines {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::IVW: return "ivw";
    case Method::Egger: return "egger";
    case Method::GSMR: return "gsmr";
    case Method::RAPS: return "raps";
  }
  return "unknown";
}

namespace {

void fill_inference(BaselineEstimate& e) {
  if (e.se == 0.0) {
    e.z = e.beta_hat == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), e.beta_hat);
    e.p_value = e.beta_hat == 0.0 ? 1.0 : 0.0;
    e.degenerate_fit = true;
    return;
  }
  e.z = e.beta_hat / e.se;
  e.p_value = special::two_sided_p(e.z);
  if (e.p_value < DBL_MIN) {
    e.p_value = 0.0;
    e.degenerate_fit = true;
  }
}

void require_n(const SummaryDataset& d, std::size_t n_min) {
  validate(d);
  if (d.size() < n_min) {
    throw Error(ErrorKind::DatasetTooSmall, "need at least " + std::to_string(n_min) +
                                                " instruments, got " + std::to_string(d.size()));
  }
}

}  // namespace

BaselineEstimate ivw(const SummaryDataset& d) {
  require_n(d, 2);
  const std::size_t n = d.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = 1.0 / (d.sigma_y[j] * d.sigma_y[j]);
    sxy += d.Gamma_hat[j] * d.gamma_hat[j] * w;
    sxx += d.gamma_hat[j] * d.gamma_hat[j] * w;
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::UndefinedEstimator, "IVW undefined: every gamma_hat is 0");
  BaselineEstimate e;
  e.method = Method::IVW;
  e.beta_hat = sxy / sxx;
  double rss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = d.Gamma_hat[j] - e.beta_hat * d.gamma_hat[j];
    rss += r * r / (d.sigma_y[j] * d.sigma_y[j]);
  }
  const double sigma2 = rss / static_cast<double>(n - 1);
  e.se = std::sqrt(sigma2 / sxx);
  fill_inference(e);
  return e;
}

BaselineEstimate egger(const SummaryDataset& d) {
  require_n(d, 3);
  const std::size_t n = d.size();
  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = 1.0 / (d.sigma_y[j] * d.sigma_y[j]);
    sw += w;
    swx += w * d.gamma_hat[j];
    swy += w * d.Gamma_hat[j];
  }
  const double xbar = swx / sw, ybar = swy / sw;
  double sxx = 0.0, sxy = 0.0, raw = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double w = 1.0 / (d.sigma_y[j] * d.sigma_y[j]);
    const double dx = d.gamma_hat[j] - xbar;
    sxx += w * dx * dx;
    sxy += w * dx * (d.Gamma_hat[j] - ybar);
    raw += w * d.gamma_hat[j] * d.gamma_hat[j];
  }
  if (!(sxx > 1e-12 * raw) || !(sxx > 0.0)) {
    throw Error(ErrorKind::CollinearInstruments, "Egger design is rank deficient: gamma_hat values are all equal");
  }
  BaselineEstimate e;
  e.method = Method::Egger;
  e.beta_hat = sxy / sxx;
  e.intercept = ybar - e.beta_hat * xbar;
  double rss = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double r = d.Gamma_hat[j] - e.intercept - e.beta_hat * d.gamma_hat[j];
    rss += r * r / (d.sigma_y[j] * d.sigma_y[j]);
  }
  const double sigma2 = rss / static_cast<double>(n - 2);
  e.se = std::sqrt(sigma2 / sxx);
  // [(X'WX)^{-1}]_00 = 1/sw + xbar^2/sxx
  e.intercept_se = std::sqrt(sigma2 * (1.0 / sw + xbar * xbar / sxx));
  fill_inference(e);
  return e;
}

BaselineEstimate gsmr_lite(const SummaryDataset& d, double outlier_alpha) {
  require_n(d, 2);
  const std::size_t n = d.size();
  std::vector<double> ratio(n), ratio_var(n), exposure_z(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (d.gamma_hat[j] == 0.0) {
      throw Error(ErrorKind::UndefinedEstimator, "GSMR ratio undefined: gamma_hat is 0 at index " + std::to_string(j));
    }
    ratio[j] = d.Gamma_hat[j] / d.gamma_hat[j];
    ratio_var[j] = d.sigma_y[j] * d.sigma_y[j] / (d.gamma_hat[j] * d.gamma_hat[j]);
    exposure_z[j] = std::fabs(d.gamma_hat[j] / d.sigma_x[j]);
  }

  // Ranks of the ratio estimates; ties broken by index so the order is total.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t k) { return ratio[i] < ratio[k]; });
  std::vector<std::size_t> band;
  for (std::size_t r = 0; r < n; ++r) {
    const double q = static_cast<double>(r + 1) / static_cast<double>(n);
    if (q > 0.40 && q <= 0.60) band.push_back(order[r]);
  }
  if (band.empty()) band.push_back(order[(n - 1) / 2]);

  std::size_t target = band.front();
  for (std::size_t j : band) {
    // lowest exposure p-value == largest |z|; then lowest index
    if (exposure_z[j] > exposure_z[target] || (exposure_z[j] == exposure_z[target] && j < target)) {
      target = j;
    }
  }

  BaselineEstimate e;
  e.method = Method::GSMR;
  e.target_snp = target;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < n; ++j) {
    if (j != target) {
      const double z = (ratio[j] - ratio[target]) / std::sqrt(ratio_var[j] + ratio_var[target]);
      if (special::two_sided_p(z) < outlier_alpha) {
        e.removed_snps.push_back(j);
        continue;
      }
    }
    keep.push_back(j);
  }
  if (keep.size() < 2) {
    throw Error(ErrorKind::InsufficientInstruments,
                "GSMR: fewer than 2 instruments survive outlier filtering");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t j : keep) {
    const double w = 1.0 / (d.sigma_y[j] * d.sigma_y[j] + ratio[j] * ratio[j] * d.sigma_x[j] * d.sigma_x[j]);
    num += d.Gamma_hat[j] * d.gamma_hat[j] * w;
    den += d.gamma_hat[j] * d.gamma_hat[j] * w;
  }
  e.beta_hat = num / den;
  e.se = std::sqrt(1.0 / den);
  fill_inference(e);
  return e;
}

double raps_loglik(const SummaryDataset& d, double beta, double tau_sq) {
  double l = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double sy2 = d.sigma_y[j] * d.sigma_y[j] + tau_sq;
    const double D = sy2 + beta * beta * d.sigma_x[j] * d.sigma_x[j];
    const double r = d.Gamma_hat[j] - beta * d.gamma_hat[j];
    l += r * r / D + std::log(sy2);
  }
  return -0.5 * l;
}

double raps_score(const SummaryDataset& d, double beta, double tau_sq) {
  double g = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double sx2 = d.sigma_x[j] * d.sigma_x[j];
    const double D = d.sigma_y[j] * d.sigma_y[j] + tau_sq + beta * beta * sx2;
    const double r = d.Gamma_hat[j] - beta * d.gamma_hat[j];
    // d/dbeta (r^2 / D) = -2 r (gamma_hat D + r beta sx2) / D^2
    g += -2.0 * r * (d.gamma_hat[j] * D + r * beta * sx2) / (D * D);
  }
  return -0.5 * g;
}

double raps_curvature(const SummaryDataset& d, double beta, double tau_sq) {
  double h = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double sx2 = d.sigma_x[j] * d.sigma_x[j];
    const double gh = d.gamma_hat[j];
    const double D = d.sigma_y[j] * d.sigma_y[j] + tau_sq + beta * beta * sx2;
    const double Dp = 2.0 * beta * sx2;
    const double r = d.Gamma_hat[j] - beta * gh;
    h += 2.0 * gh * gh / D + 4.0 * r * gh * Dp / (D * D) - r * r * 2.0 * sx2 / (D * D) +
         2.0 * r * r * Dp * Dp / (D * D * D);
  }
  return -0.5 * h;
}

namespace {

// argmax over beta of raps_loglik at fixed tau^2: Newton steps, falling back
// to halved steps along the score when Newton fails to increase l.
double raps_inner(const SummaryDataset& d, double tau_sq, double beta0) {
  double beta = beta0;
  double l = raps_loglik(d, beta, tau_sq);
  for (int it = 0; it < 200; ++it) {
    const double g = raps_score(d, beta, tau_sq);
    const double h = raps_curvature(d, beta, tau_sq);
    double step = (h < 0.0) ? -g / h : g * 1e-2 / (std::fabs(g) + 1e-300) * (1.0 + std::fabs(beta));
    double nb = beta + step, nl = raps_loglik(d, nb, tau_sq);
    int halvings = 0;
    while (!(nl >= l) && halvings < 60) {
      step *= 0.5;
      nb = beta + step;
      nl = raps_loglik(d, nb, tau_sq);
      ++halvings;
    }
    if (!(nl >= l)) break;
    const bool small = std::fabs(nb - beta) <= 1e-13 * (1.0 + std::fabs(beta));
    beta = nb;
    l = nl;
    if (small) break;
  }
  return beta;
}

}  // namespace

BaselineEstimate raps_lite(const SummaryDataset& d, const RapsOptions& opt) {
  require_n(d, 3);
  const std::size_t n = d.size();
  double beta_start = 0.0;
  {
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double w = 1.0 / (d.sigma_y[j] * d.sigma_y[j]);
      sxy += d.Gamma_hat[j] * d.gamma_hat[j] * w;
      sxx += d.gamma_hat[j] * d.gamma_hat[j] * w;
    }
    if (sxx > 0.0) beta_start = sxy / sxx;
  }

  double tau_sq = 0.0;
  double beta = 0.0;
  if (opt.fixed_tau_sq) {
    tau_sq = *opt.fixed_tau_sq;
    beta = raps_inner(d, tau_sq, beta_start);
  } else {
    double msr = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = d.Gamma_hat[j] - beta_start * d.gamma_hat[j];
      msr += r * r;
    }
    msr /= static_cast<double>(n);
    double lo = 0.0, hi = std::max(4.0 * msr, 1e-6);

    double warm = beta_start;
    auto profile = [&](double t) {
      warm = raps_inner(d, t, warm);
      return raps_loglik(d, warm, t);
    };
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = profile(x1), f2 = profile(x2);
    int it = 0;
    while (hi - lo > opt.tol * (1.0 + hi)) {
      if (++it > opt.max_outer_iter) {
        throw Error(ErrorKind::OptimizationFailure, "RAPS: tau^2 search did not converge in " +
                                                        std::to_string(opt.max_outer_iter) + " iterations");
      }
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + invphi * (hi - lo);
        f2 = profile(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - invphi * (hi - lo);
        f1 = profile(x1);
      }
    }
    tau_sq = 0.5 * (lo + hi);
    beta = raps_inner(d, tau_sq, warm);
    const double b0 = raps_inner(d, 0.0, beta);
    if (raps_loglik(d, b0, 0.0) >= raps_loglik(d, beta, tau_sq)) {
      tau_sq = 0.0;
      beta = b0;
    }
  }

  BaselineEstimate e;
  e.method = Method::RAPS;
  e.beta_hat = beta;
  e.tau_sq = tau_sq;
  const double h = 1e-6 * std::max(std::fabs(beta), 1.0);
  const double curv = (raps_score(d, beta + h, tau_sq) - raps_score(d, beta - h, tau_sq)) / (2.0 * h);
  if (!(curv < 0.0) || !std::isfinite(curv)) {
    throw Error(ErrorKind::OptimizationFailure, "RAPS: observed information is not positive at the optimum");
  }
  e.se = std::sqrt(-1.0 / curv);
  fill_inference(e);
  return e;
}

}  // namespace bwmr::baselines
