#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bwmr/dataset.hpp"
#include "bwmr/rng.hpp"

namespace bwmr::sim {

enum class Regime { IndividualFourGroup, Case1, Case2, Case3, Case4, Case5 };
enum class SelectionMode { TwoDataset, Biased };

std::string_view to_string(Regime r);
std::string_view to_string(SelectionMode m);
std::optional<Regime> parse_regime(std::string_view s);  // "case1".."case5", "individual"
std::optional<SelectionMode> parse_selection_mode(std::string_view s);  // "two-dataset", "biased"

struct SimulationSpec {
  Regime regime = Regime::Case1;
  double beta = 0.0;

  // summary level
  std::size_t n_snps = 300;
  double sigma = 0.8;
  double tau = 0.2;
  double se_lower = 0.3;  // c
  double se_upper = 0.5;  // d
  double beta_c = 3.0;        // Case 2
  double corrupt_rate = 0.2;  // C, Cases 2 and 3
  double tau_c = 3.0;         // Case 3
  double mix_rate = 0.2;      // R, Case 4
  double laplace_rate = 1.0;  // r, Case 5
  bool shuffle_corrupt = false;

  // individual level
  std::size_t n0 = 10000;
  std::size_t n1 = 5000;
  std::size_t n2 = 5000;
  double pi00 = 0.82;
  double pi10 = 0.08;  // exposure effect only
  double pi01 = 0.08;  // outcome effect only
  double pi11 = 0.02;  // both (pleiotropic instruments)
  double snr1 = 1.0;
  double snr2 = 1.0;
  double sigma_gamma_sq = 1.0;
  double sigma_alpha_sq = 1.0;
  double pval_threshold = 1e-5;
  SelectionMode selection_mode = SelectionMode::TwoDataset;

  std::uint64_t seed = 1;
};

// Throws InvalidInput on out-of-range fields.
void validate(const SimulationSpec& spec);

struct GroundTruth {
  std::vector<double> gamma;   // per SNP of the returned dataset
  std::vector<double> alpha;
  std::vector<double> Gamma;
  std::vector<std::uint8_t> corrupted;  // Cases 2/3: 1 for the corrupted block

  // individual level only
  std::vector<std::size_t> selected;  // indices into the N0 simulated SNPs
  std::vector<int> group;             // per selected SNP: 0 = 00, 1 = 10, 2 = 01, 3 = 11
  std::vector<double> selection_p;    // exposure p-value used for selection
  double snr1_sq_realized = 0.0;
  double snr2_sq_realized = 0.0;
};

struct SimulatedData {
  SummaryDataset data;
  GroundTruth truth;
};

SimulatedData gen_summary_level(const SimulationSpec& spec, Rng& rng);
SimulatedData gen_individual_level(const SimulationSpec& spec, Rng& rng);
// Dispatches on spec.regime.
SimulatedData generate(const SimulationSpec& spec, Rng& rng);

// Simple regression of y on one genotype column.  p uses the normal
// approximation to the slope t statistic.
struct RegressionResult {
  double slope = 0.0;
  double se = 0.0;
  double p_value = 1.0;
};
// `y_centered` must already have its mean removed; `syy` = sum(y_centered^2).
RegressionResult regress_snp(const std::uint8_t* g, const double* y_centered, std::size_t n, double syy);

// ----------------------------------------------------------------- harness

enum class Estimator { BWMR, IVW, Egger, GSMR, RAPS };
std::string_view to_string(Estimator e);
std::optional<Estimator> parse_estimator(std::string_view s);

struct MethodResult {
  bool ok = false;
  double beta_hat = 0.0;
  double se = 0.0;
  double p_value = 1.0;
  std::string error;  // error kind when !ok
};

MethodResult run_method(Estimator e, const SummaryDataset& data);

struct MethodSummary {
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  double mean_beta = 0.0;
  double sd_beta = 0.0;
  double rejection_rate = 0.0;  // share of successful replicates with p < 0.05
  // (expected, observed) -log10 p, ascending in expected
  std::vector<std::pair<double, double>> qq;
};

struct ReplicationReport {
  SimulationSpec spec;
  std::size_t reps = 0;
  std::vector<Estimator> methods;
  std::vector<std::vector<MethodResult>> results;  // [method][replicate]
  std::vector<std::size_t> n_instruments;          // per replicate (0 if generation failed)
  std::vector<std::string> generation_errors;      // per replicate, empty on success
  std::vector<MethodSummary> summaries;            // [method]
};

MethodSummary summarize(const std::vector<MethodResult>& results, double alpha = 0.05);

// parallelism 0 means std::thread::hardware_concurrency().
ReplicationReport run_replications(const SimulationSpec& spec, const std::vector<Estimator>& methods,
                                   std::size_t reps, std::size_t parallelism = 1);

}  // namespace bwmr::sim
