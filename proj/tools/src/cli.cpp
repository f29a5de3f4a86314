#include "bwmr/cli/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bwmr/error.hpp"
#include "output.hpp"

namespace bwmr::cli {

namespace {

std::vector<sim::Estimator> parse_methods(const std::string& list) {
  std::vector<sim::Estimator> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = std::min(list.find(',', start), list.size());
    const std::string name = list.substr(start, comma - start);
    const auto m = sim::parse_estimator(name);
    if (!m) throw Error(ErrorKind::Usage, "unknown method '" + name + "' (bwmr, ivw, egger, gsmr, raps)");
    if (std::find(out.begin(), out.end(), *m) != out.end()) {
      throw Error(ErrorKind::Usage, "method '" + name + "' listed twice");
    }
    out.push_back(*m);
    start = comma + 1;
  }
  return out;
}

std::size_t threads_from_env(std::size_t fallback) {
  const char* env = std::getenv("BWMR_THREADS");
  if (env == nullptr || *env == '\0') return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw Error(ErrorKind::Usage, std::string("BWMR_THREADS is not a count: '") + env + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian weighted Mendelian randomization", "bwmr"};
  app.set_version_flag("--version", BWMR_VERSION);
  app.require_subcommand(1);

  FitOptions fit;
  std::string fit_methods = "bwmr";
  std::string fit_format = "json";
  CLI::App* fit_cmd = app.add_subcommand("fit", "Estimate the causal effect from two GWAS summary tables");
  fit_cmd->add_option("--exposure", fit.exposure, "Exposure GWAS TSV (pre-clumped)")->required();
  fit_cmd->add_option("--outcome", fit.outcome, "Outcome GWAS TSV")->required();
  fit_cmd->add_option("--pval-threshold", fit.pval_threshold, "Keep instruments with exposure p <= F")
      ->capture_default_str();
  fit_cmd->add_option("--methods", fit_methods, "Comma list of bwmr,ivw,egger,gsmr,raps")->capture_default_str();
  fit_cmd->add_flag("--keep-palindromic", fit.keep_palindromic, "Keep A/T and C/G SNPs");
  fit_cmd->add_option("--out", fit.out_path, "Output file (default stdout)");
  fit_cmd->add_option("--format", fit_format, "json or tsv")
      ->check(CLI::IsMember({"json", "tsv"}))
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Seed echoed into provenance")->capture_default_str();
  fit_cmd->add_flag("--reproducible", fit.reproducible, "Omit the timestamp");

  SimulateOptions simo;
  sim::SimulationSpec& s = simo.spec;
  std::string regime = "case1";
  std::string sim_methods = "bwmr";
  std::string selection_mode = "two-dataset";
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run a seeded Monte-Carlo replication study");
  sim_cmd->add_option("--regime", regime, "case1..case5 or individual")
      ->check(CLI::IsMember({"case1", "case2", "case3", "case4", "case5", "individual"}))
      ->capture_default_str();
  sim_cmd->add_option("--reps", simo.reps, "Replicates")->capture_default_str();
  sim_cmd->add_option("--seed", s.seed, "Master seed")->capture_default_str();
  sim_cmd->add_option("--methods", sim_methods, "Comma list of bwmr,ivw,egger,gsmr,raps")->capture_default_str();
  sim_cmd->add_option("--threads", simo.threads, "Worker threads, 0 = available (BWMR_THREADS overrides)")
      ->capture_default_str();
  sim_cmd->add_option("--out", simo.out_path, "Report JSON file (default stdout)");
  sim_cmd->add_option("--qq", simo.qq_path, "qq CSV file");
  sim_cmd->add_flag("--reproducible", simo.reproducible, "Omit the timestamp");
  sim_cmd->add_option("--beta", s.beta, "True causal effect")->capture_default_str();

  std::vector<CLI::Option*> summary_opts, individual_opts;
  auto summary = [&](CLI::Option* o) { summary_opts.push_back(o->capture_default_str()); return o; };
  auto individual = [&](CLI::Option* o) { individual_opts.push_back(o->capture_default_str()); return o; };
  summary(sim_cmd->add_option("--n-snps", s.n_snps, "Instruments N (summary level)"));
  summary(sim_cmd->add_option("--sigma", s.sigma, "sd of gamma"));
  summary(sim_cmd->add_option("--tau", s.tau, "sd of pleiotropy alpha"));
  summary(sim_cmd->add_option("--se-lower", s.se_lower, "Standard errors ~ U[c, d]: c"));
  summary(sim_cmd->add_option("--se-upper", s.se_upper, "Standard errors ~ U[c, d]: d"));
  CLI::Option* beta_c = summary(sim_cmd->add_option("--beta-c", s.beta_c, "Case 2 corrupted effect"));
  CLI::Option* corrupt = summary(sim_cmd->add_option("--corrupt-rate", s.corrupt_rate, "Cases 2, 3: share C"));
  CLI::Option* tau_c = summary(sim_cmd->add_option("--tau-c", s.tau_c, "Case 3 corrupted pleiotropy sd"));
  CLI::Option* mix = summary(sim_cmd->add_option("--mix-rate", s.mix_rate, "Case 4 mixture share R"));
  CLI::Option* lap = summary(sim_cmd->add_option("--laplace-rate", s.laplace_rate, "Case 5 Laplace rate r"));
  CLI::Option* shuffle = sim_cmd->add_flag("--shuffle-corrupt", s.shuffle_corrupt, "Random corrupted positions");
  summary_opts.push_back(shuffle);

  individual(sim_cmd->add_option("--n0", s.n0, "Simulated SNPs N0"));
  individual(sim_cmd->add_option("--n1", s.n1, "Exposure sample size"));
  individual(sim_cmd->add_option("--n2", s.n2, "Outcome sample size"));
  individual(sim_cmd->add_option("--pi00", s.pi00, "Share of null SNPs"));
  individual(sim_cmd->add_option("--pi10", s.pi10, "Share affecting the exposure only"));
  individual(sim_cmd->add_option("--pi01", s.pi01, "Share affecting the outcome only"));
  individual(sim_cmd->add_option("--pi11", s.pi11, "Share affecting both"));
  individual(sim_cmd->add_option("--snr1", s.snr1, "Exposure signal-to-noise ratio"));
  individual(sim_cmd->add_option("--snr2", s.snr2, "Outcome signal-to-noise ratio"));
  individual(sim_cmd->add_option("--sigma-gamma-sq", s.sigma_gamma_sq, "Variance of nonzero gamma"));
  individual(sim_cmd->add_option("--sigma-alpha-sq", s.sigma_alpha_sq, "Variance of nonzero alpha"));
  individual(sim_cmd->add_option("--pval-threshold", s.pval_threshold, "Instrument selection threshold"));
  individual(sim_cmd->add_option("--selection-mode", selection_mode, "two-dataset or biased")
                 ->check(CLI::IsMember({"two-dataset", "biased"})));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << BWMR_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    write_error(err, to_string(ErrorKind::Usage), e.what());
    return 2;
  }

  try {
    if (fit_cmd->parsed()) {
      fit.methods = parse_methods(fit_methods);
      fit.format = fit_format == "tsv" ? Format::Tsv : Format::Json;
      return cmd_fit(fit, out, err);
    }

    s.regime = *sim::parse_regime(regime);
    const bool indiv = s.regime == sim::Regime::IndividualFourGroup;
    for (CLI::Option* o : indiv ? summary_opts : individual_opts) {
      if (o->count() > 0) {
        throw Error(ErrorKind::Usage, o->get_name() + " does not apply to --regime " + regime);
      }
    }
    auto only_for = [&](CLI::Option* o, std::initializer_list<sim::Regime> ok) {
      if (o->count() > 0 && std::find(ok.begin(), ok.end(), s.regime) == ok.end()) {
        throw Error(ErrorKind::Usage, o->get_name() + " does not apply to --regime " + regime);
      }
    };
    only_for(beta_c, {sim::Regime::Case2});
    only_for(tau_c, {sim::Regime::Case3});
    only_for(corrupt, {sim::Regime::Case2, sim::Regime::Case3});
    only_for(shuffle, {sim::Regime::Case2, sim::Regime::Case3});
    only_for(mix, {sim::Regime::Case4});
    only_for(lap, {sim::Regime::Case5});
    if (simo.reps < 1) throw Error(ErrorKind::Usage, "--reps must be >= 1");
    s.selection_mode = *sim::parse_selection_mode(selection_mode);
    sim::validate(s);
    simo.methods = parse_methods(sim_methods);
    simo.threads = threads_from_env(simo.threads);
    return cmd_simulate(simo, out, err);
  } catch (const Error& e) {
    write_error(err, to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    write_error(err, "internal", e.what());
    return 3;
  }
}

}  // namespace bwmr::cli
