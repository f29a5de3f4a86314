#include "bwmr/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <thread>

#include "bwmr/baselines.hpp"
#include "bwmr/error.hpp"
#include "bwmr/lrvb.hpp"
#include "bwmr/special.hpp"

namespace bwmr::sim {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::IndividualFourGroup: return "individual";
    case Regime::Case1: return "case1";
    case Regime::Case2: return "case2";
    case Regime::Case3: return "case3";
    case Regime::Case4: return "case4";
    case Regime::Case5: return "case5";
  }
  return "unknown";
}

std::string_view to_string(SelectionMode m) {
  return m == SelectionMode::TwoDataset ? "two-dataset" : "biased";
}

std::optional<Regime> parse_regime(std::string_view s) {
  for (Regime r : {Regime::IndividualFourGroup, Regime::Case1, Regime::Case2, Regime::Case3,
                   Regime::Case4, Regime::Case5}) {
    if (s == to_string(r)) return r;
  }
  return std::nullopt;
}

std::optional<SelectionMode> parse_selection_mode(std::string_view s) {
  if (s == "two-dataset") return SelectionMode::TwoDataset;
  if (s == "biased") return SelectionMode::Biased;
  return std::nullopt;
}

void validate(const SimulationSpec& s) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidInput, m); };
  if (!std::isfinite(s.beta)) fail("beta must be finite");
  if (s.regime == Regime::IndividualFourGroup) {
    if (s.n0 < 1 || s.n1 < 4 || s.n2 < 4) fail("n0 must be >= 1 and n1, n2 >= 4");
    const double props[] = {s.pi00, s.pi10, s.pi01, s.pi11};
    double total = 0.0;
    for (double p : props) {
      if (!(p >= 0.0)) fail("group proportions must be nonnegative");
      total += p;
    }
    if (std::fabs(total - 1.0) > 1e-12) fail("group proportions must sum to 1");
    if (!(s.snr1 > 0.0) || !(s.snr2 > 0.0)) fail("snr1 and snr2 must be > 0");
    if (!(s.sigma_gamma_sq > 0.0) || !(s.sigma_alpha_sq >= 0.0)) fail("effect variances out of range");
    if (!(s.pval_threshold >= 0.0 && s.pval_threshold <= 1.0)) fail("pval_threshold must lie in [0, 1]");
  } else {
    if (s.n_snps < 1) fail("N must be >= 1");
    if (!(s.se_lower > 0.0) || !(s.se_upper >= s.se_lower)) fail("need 0 < c <= d");
    if (!(s.sigma > 0.0) || !(s.tau >= 0.0)) fail("sigma must be > 0 and tau >= 0");
    if (!(s.corrupt_rate >= 0.0 && s.corrupt_rate < 1.0)) fail("corrupt rate C must lie in [0, 1)");
    if (!(s.mix_rate >= 0.0 && s.mix_rate < 1.0)) fail("mix rate R must lie in [0, 1)");
    if (!(s.laplace_rate > 0.0)) fail("laplace rate must be > 0");
    if (!(s.tau_c >= 0.0) || !std::isfinite(s.beta_c)) fail("corruption parameters out of range");
  }
}

// ----------------------------------------------------------- summary level

SimulatedData gen_summary_level(const SimulationSpec& spec, Rng& rng) {
  validate(spec);
  if (spec.regime == Regime::IndividualFourGroup) {
    throw Error(ErrorKind::InvalidInput, "gen_summary_level needs a Case1..Case5 regime");
  }
  const std::size_t n = spec.n_snps;
  SimulatedData out;
  out.data.reserve(n);
  GroundTruth& t = out.truth;
  t.gamma.resize(n);
  t.alpha.resize(n);
  t.Gamma.resize(n);
  t.corrupted.assign(n, 0);

  if (spec.regime == Regime::Case2 || spec.regime == Regime::Case3) {
    const auto nc = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.corrupt_rate));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (spec.shuffle_corrupt) {
      for (std::size_t i = n; i > 1; --i) {
        const auto k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i));
        std::swap(idx[i - 1], idx[std::min(k, i - 1)]);
      }
    }
    for (std::size_t k = n - nc; k < n; ++k) t.corrupted[idx[k]] = 1;
  }

  for (std::size_t j = 0; j < n; ++j) {
    const double sx = rng.uniform(spec.se_lower, spec.se_upper);
    const double sy = rng.uniform(spec.se_lower, spec.se_upper);
    double gamma = 0.0, alpha = 0.0, slope = spec.beta;
    switch (spec.regime) {
      case Regime::Case1:
        gamma = rng.normal(0.0, spec.sigma);
        alpha = rng.normal(0.0, spec.tau);
        break;
      case Regime::Case2:
        gamma = rng.normal(0.0, spec.sigma);
        alpha = rng.normal(0.0, spec.tau);
        if (t.corrupted[j]) slope = spec.beta_c;
        break;
      case Regime::Case3:
        gamma = rng.normal(0.0, spec.sigma);
        alpha = rng.normal(0.0, t.corrupted[j] ? spec.tau_c : spec.tau);
        break;
      case Regime::Case4: {
        const bool wide = rng.bernoulli(spec.mix_rate);
        gamma = rng.normal(0.0, wide ? std::sqrt(10.0) * spec.sigma : spec.sigma);
        alpha = rng.normal(0.0, spec.tau);
        break;
      }
      case Regime::Case5:
        gamma = rng.normal(0.0, spec.sigma);
        alpha = spec.tau * rng.laplace(spec.laplace_rate);
        break;
      case Regime::IndividualFourGroup:
        break;
    }
    const double Gamma = slope * gamma + alpha;
    t.gamma[j] = gamma;
    t.alpha[j] = alpha;
    t.Gamma[j] = Gamma;
    const double gh = rng.normal(gamma, sx);
    const double Gh = rng.normal(Gamma, sy);
    out.data.push_back(gh, sx, Gh, sy);
  }
  return out;
}

// -------------------------------------------------------- individual level

RegressionResult regress_snp(const std::uint8_t* g, const double* yc, std::size_t n, double syy) {
  std::uint64_t sg = 0, sgg = 0;
  double sgy = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sg += g[i];
    sgg += static_cast<std::uint64_t>(g[i]) * g[i];
    sgy += g[i] * yc[i];
    sy += yc[i];
  }
  RegressionResult r;
  const double nd = static_cast<double>(n);
  const double sxx = static_cast<double>(n * sgg - sg * sg) / nd;
  if (!(sxx > 0.0) || n < 3) {
    r.se = std::numeric_limits<double>::infinity();
    return r;
  }
  const double gbar = static_cast<double>(sg) / nd;
  const double sxy = sgy - gbar * sy;
  r.slope = sxy / sxx;
  const double rss = std::max(syy - r.slope * sxy, 0.0);
  r.se = std::sqrt(rss / (nd - 2.0) / sxx);
  r.p_value = r.se > 0.0 ? special::two_sided_p(r.slope / r.se) : 0.0;
  return r;
}

namespace {

void fill_genotypes(std::uint64_t key, std::size_t snp, double maf, std::vector<std::uint8_t>& g) {
  Rng col(key, snp);
  for (auto& v : g) v = static_cast<std::uint8_t>(col.binomial2(maf));
}

double sample_var(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / (n - 1.0);
}

struct Phenotype {
  std::vector<double> centered;
  double syy = 0.0;
  double snr_sq = 0.0;  // realized Var(genetic) / Var(noise)
};

// y = G b + e with Var(e) scaled so that the realized ratio is exactly snr^2.
Phenotype make_phenotype(std::uint64_t key, std::size_t n, const std::vector<double>& maf,
                         const std::vector<double>& effect, double snr, Rng& rng) {
  std::vector<double> genetic(n, 0.0);
  std::vector<std::uint8_t> g(n);
  for (std::size_t j = 0; j < effect.size(); ++j) {
    if (effect[j] == 0.0) continue;
    fill_genotypes(key, j, maf[j], g);
    for (std::size_t i = 0; i < n; ++i) genetic[i] += effect[j] * g[i];
  }
  std::vector<double> noise(n);
  for (auto& e : noise) e = rng.normal();
  const double vg = sample_var(genetic);
  const double ve = sample_var(noise);
  Phenotype ph;
  if (vg > 0.0) {
    const double scale = std::sqrt(vg / (snr * snr) / ve);
    for (auto& e : noise) e *= scale;
    ph.snr_sq = vg / sample_var(noise);
  }
  std::vector<double> y(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = genetic[i] + noise[i];
    mean += y[i];
  }
  mean /= static_cast<double>(n);
  for (auto& v : y) {
    v -= mean;
    ph.syy += v * v;
  }
  ph.centered = std::move(y);
  return ph;
}

}  // namespace

SimulatedData gen_individual_level(const SimulationSpec& spec, Rng& rng) {
  validate(spec);
  if (spec.regime != Regime::IndividualFourGroup) {
    throw Error(ErrorKind::InvalidInput, "gen_individual_level needs the individual regime");
  }
  const std::size_t n0 = spec.n0;
  const std::uint64_t key_g1 = rng.next_u64();
  const std::uint64_t key_g1_rep = rng.next_u64();
  const std::uint64_t key_g2 = rng.next_u64();

  std::vector<double> maf(n0), gamma(n0, 0.0), alpha(n0, 0.0), Gamma(n0);
  std::vector<int> group(n0);
  const double sg = std::sqrt(spec.sigma_gamma_sq), sa = std::sqrt(spec.sigma_alpha_sq);
  for (std::size_t j = 0; j < n0; ++j) {
    maf[j] = rng.uniform(0.05, 0.5);
    const double u = rng.uniform();
    int grp = 0;
    if (u < spec.pi00) grp = 0;
    else if (u < spec.pi00 + spec.pi10) grp = 1;
    else if (u < spec.pi00 + spec.pi10 + spec.pi01) grp = 2;
    else grp = 3;
    group[j] = grp;
    if (grp == 1 || grp == 3) gamma[j] = rng.normal(0.0, sg);
    if (grp == 2 || grp == 3) alpha[j] = rng.normal(0.0, sa);
    Gamma[j] = spec.beta * gamma[j] + alpha[j];
  }

  const bool two = spec.selection_mode == SelectionMode::TwoDataset;
  const Phenotype x = make_phenotype(key_g1, spec.n1, maf, gamma, spec.snr1, rng);
  const Phenotype y = make_phenotype(key_g2, spec.n2, maf, Gamma, spec.snr2, rng);
  Phenotype x_rep;
  if (two) x_rep = make_phenotype(key_g1_rep, spec.n1, maf, gamma, spec.snr1, rng);

  SimulatedData out;
  GroundTruth& t = out.truth;
  t.snr1_sq_realized = x.snr_sq;
  t.snr2_sq_realized = y.snr_sq;
  std::vector<std::uint8_t> g1(spec.n1), g2(spec.n2), g1r(two ? spec.n1 : 0);
  for (std::size_t j = 0; j < n0; ++j) {
    fill_genotypes(key_g1, j, maf[j], g1);
    const RegressionResult rx = regress_snp(g1.data(), x.centered.data(), spec.n1, x.syy);
    double p_sel = rx.p_value;
    if (two) {
      fill_genotypes(key_g1_rep, j, maf[j], g1r);
      p_sel = regress_snp(g1r.data(), x_rep.centered.data(), spec.n1, x_rep.syy).p_value;
    }
    if (!(p_sel <= spec.pval_threshold)) continue;
    fill_genotypes(key_g2, j, maf[j], g2);
    const RegressionResult ry = regress_snp(g2.data(), y.centered.data(), spec.n2, y.syy);
    // monomorphic columns give no usable estimate
    if (!(rx.se > 0.0) || !std::isfinite(rx.se) || !(ry.se > 0.0) || !std::isfinite(ry.se)) continue;
    out.data.push_back(rx.slope, rx.se, ry.slope, ry.se, "snp" + std::to_string(j + 1));
    t.selected.push_back(j);
    t.group.push_back(group[j]);
    t.selection_p.push_back(p_sel);
    t.gamma.push_back(gamma[j]);
    t.alpha.push_back(alpha[j]);
    t.Gamma.push_back(Gamma[j]);
  }
  if (out.data.size() == 0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", spec.pval_threshold);
    throw Error(ErrorKind::EmptySelection, std::string("no SNP selected at p <= ") + buf);
  }
  t.corrupted.assign(out.data.size(), 0);
  return out;
}

SimulatedData generate(const SimulationSpec& spec, Rng& rng) {
  return spec.regime == Regime::IndividualFourGroup ? gen_individual_level(spec, rng)
                                                    : gen_summary_level(spec, rng);
}

// ------------------------------------------------------------------ harness

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::BWMR: return "bwmr";
    case Estimator::IVW: return "ivw";
    case Estimator::Egger: return "egger";
    case Estimator::GSMR: return "gsmr";
    case Estimator::RAPS: return "raps";
  }
  return "unknown";
}

std::optional<Estimator> parse_estimator(std::string_view s) {
  for (Estimator e : {Estimator::BWMR, Estimator::IVW, Estimator::Egger, Estimator::GSMR, Estimator::RAPS}) {
    if (s == to_string(e)) return e;
  }
  return std::nullopt;
}

MethodResult run_method(Estimator e, const SummaryDataset& data) {
  MethodResult r;
  try {
    if (e == Estimator::BWMR) {
      const CausalEstimate est = estimate(data);
      r.beta_hat = est.beta_hat;
      r.se = est.se;
      r.p_value = est.p_value;
    } else {
      baselines::BaselineEstimate b;
      switch (e) {
        case Estimator::IVW: b = baselines::ivw(data); break;
        case Estimator::Egger: b = baselines::egger(data); break;
        case Estimator::GSMR: b = baselines::gsmr_lite(data); break;
        default: b = baselines::raps_lite(data); break;
      }
      r.beta_hat = b.beta_hat;
      r.se = b.se;
      r.p_value = b.p_value;
    }
    r.ok = true;
  } catch (const Error& err) {
    r.error = std::string(bwmr::to_string(err.kind()));
  } catch (const std::exception& err) {
    r.error = std::string("internal: ") + err.what();
  }
  return r;
}

MethodSummary summarize(const std::vector<MethodResult>& results, double alpha) {
  MethodSummary s;
  std::vector<double> beta, pvals;
  for (const auto& r : results) {
    if (!r.ok) {
      ++s.n_failed;
      continue;
    }
    ++s.n_ok;
    beta.push_back(r.beta_hat);
    pvals.push_back(r.p_value);
  }
  if (s.n_ok == 0) return s;
  const double n = static_cast<double>(s.n_ok);
  double sum = 0.0;
  for (double b : beta) sum += b;
  s.mean_beta = sum / n;
  double ss = 0.0;
  for (double b : beta) ss += (b - s.mean_beta) * (b - s.mean_beta);
  s.sd_beta = s.n_ok > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::size_t rejected = 0;
  for (double p : pvals) rejected += p < alpha ? 1 : 0;
  s.rejection_rate = static_cast<double>(rejected) / n;

  std::sort(pvals.begin(), pvals.end());
  s.qq.reserve(pvals.size());
  for (std::size_t i = pvals.size(); i-- > 0;) {
    const double expected = (static_cast<double>(i) + 0.5) / n;
    const double observed = std::max(pvals[i], 1e-300);
    s.qq.emplace_back(-std::log10(expected), -std::log10(observed));
  }
  return s;
}

ReplicationReport run_replications(const SimulationSpec& spec, const std::vector<Estimator>& methods,
                                   std::size_t reps, std::size_t parallelism) {
  validate(spec);
  if (reps < 1) throw Error(ErrorKind::InvalidInput, "reps must be >= 1");
  ReplicationReport rep;
  rep.spec = spec;
  rep.reps = reps;
  rep.methods = methods;
  rep.results.assign(methods.size(), std::vector<MethodResult>(reps));
  rep.n_instruments.assign(reps, 0);
  rep.generation_errors.assign(reps, {});

  auto run_one = [&](std::size_t r) {
    Rng rng(replicate_seed(spec.seed, r));
    SimulatedData sim;
    try {
      sim = generate(spec, rng);
    } catch (const Error& e) {
      rep.generation_errors[r] = std::string(bwmr::to_string(e.kind()));
      for (std::size_t m = 0; m < methods.size(); ++m) rep.results[m][r].error = rep.generation_errors[r];
      return;
    }
    rep.n_instruments[r] = sim.data.size();
    for (std::size_t m = 0; m < methods.size(); ++m) rep.results[m][r] = run_method(methods[m], sim.data);
  };

  std::size_t workers = parallelism == 0 ? std::max(1u, std::thread::hardware_concurrency()) : parallelism;
  workers = std::min(workers, reps);
  if (workers <= 1) {
    for (std::size_t r = 0; r < reps; ++r) run_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < reps; r = next++) run_one(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (const auto& res : rep.results) rep.summaries.push_back(summarize(res));
  return rep;
}

}  // namespace bwmr::sim
