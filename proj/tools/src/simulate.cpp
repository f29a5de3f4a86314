#include <ostream>
#include <sstream>
#include <string>

#include "bwmr/cli/cli.hpp"
#include "bwmr/error.hpp"
#include "output.hpp"

namespace bwmr::cli {

namespace {

using nlohmann::ordered_json;

ordered_json spec_json(const sim::SimulationSpec& s) {
  ordered_json j;
  j["regime"] = std::string(sim::to_string(s.regime));
  j["beta"] = number(s.beta);
  if (s.regime == sim::Regime::IndividualFourGroup) {
    j["n0"] = s.n0;
    j["n1"] = s.n1;
    j["n2"] = s.n2;
    j["pi00"] = number(s.pi00);
    j["pi10"] = number(s.pi10);
    j["pi01"] = number(s.pi01);
    j["pi11"] = number(s.pi11);
    j["snr1"] = number(s.snr1);
    j["snr2"] = number(s.snr2);
    j["sigma_gamma_sq"] = number(s.sigma_gamma_sq);
    j["sigma_alpha_sq"] = number(s.sigma_alpha_sq);
    j["pval_threshold"] = number(s.pval_threshold);
    j["selection_mode"] = std::string(sim::to_string(s.selection_mode));
  } else {
    j["n_snps"] = s.n_snps;
    j["sigma"] = number(s.sigma);
    j["tau"] = number(s.tau);
    j["se_lower"] = number(s.se_lower);
    j["se_upper"] = number(s.se_upper);
    switch (s.regime) {
      case sim::Regime::Case2:
        j["beta_c"] = number(s.beta_c);
        j["corrupt_rate"] = number(s.corrupt_rate);
        j["shuffle_corrupt"] = s.shuffle_corrupt;
        break;
      case sim::Regime::Case3:
        j["tau_c"] = number(s.tau_c);
        j["corrupt_rate"] = number(s.corrupt_rate);
        j["shuffle_corrupt"] = s.shuffle_corrupt;
        break;
      case sim::Regime::Case4: j["mix_rate"] = number(s.mix_rate); break;
      case sim::Regime::Case5: j["laplace_rate"] = number(s.laplace_rate); break;
      default: break;
    }
  }
  j["seed"] = s.seed;
  return j;
}

std::string render_report(const sim::ReplicationReport& rep, bool reproducible) {
  const bool null_effect = rep.spec.beta == 0.0;
  ordered_json root;

  ordered_json summary = ordered_json::object();
  for (std::size_t m = 0; m < rep.methods.size(); ++m) {
    const auto& s = rep.summaries[m];
    ordered_json j;
    j["n_ok"] = s.n_ok;
    j["n_failed"] = s.n_failed;
    j["mean_beta"] = number(s.mean_beta);
    j["sd_beta"] = number(s.sd_beta);
    j["rejection_rate"] = number(s.rejection_rate);
    j[null_effect ? "type_i_error" : "power"] = number(s.rejection_rate);
    summary[std::string(sim::to_string(rep.methods[m]))] = std::move(j);
  }
  root["summary"] = std::move(summary);

  ordered_json reps = ordered_json::array();
  for (std::size_t r = 0; r < rep.reps; ++r) {
    ordered_json j;
    j["replicate"] = r;
    j["seed"] = replicate_seed(rep.spec.seed, r);
    j["n_instruments"] = rep.n_instruments[r];
    if (!rep.generation_errors[r].empty()) j["generation_error"] = rep.generation_errors[r];
    ordered_json res = ordered_json::object();
    for (std::size_t m = 0; m < rep.methods.size(); ++m) {
      const auto& x = rep.results[m][r];
      ordered_json e;
      if (x.ok) {
        e["beta_hat"] = number(x.beta_hat);
        e["se"] = number(x.se);
        e["pval"] = number(x.p_value);
      } else {
        e["error"] = x.error;
      }
      res[std::string(sim::to_string(rep.methods[m]))] = std::move(e);
    }
    j["results"] = std::move(res);
    reps.push_back(std::move(j));
  }
  root["replicates"] = std::move(reps);

  ordered_json prov;
  prov["tool"] = "bwmr";
  prov["version"] = BWMR_VERSION;
  ordered_json methods = ordered_json::array();
  for (auto m : rep.methods) methods.push_back(std::string(sim::to_string(m)));
  prov["config"] = spec_json(rep.spec);
  prov["reps"] = rep.reps;
  prov["methods"] = std::move(methods);
  prov["seed_splitting"] = "mix64(seed ^ mix64(replicate + 0x9e3779b97f4a7c15)), Philox4x32-10";
  if (!reproducible) prov["timestamp"] = utc_timestamp();
  root["provenance"] = std::move(prov);
  return root.dump(2) + "\n";
}

std::string render_qq(const sim::ReplicationReport& rep) {
  std::ostringstream s;
  s << "method,expected_neglog10p,observed_neglog10p\n";
  for (std::size_t m = 0; m < rep.methods.size(); ++m) {
    for (const auto& [e, o] : rep.summaries[m].qq) {
      s << sim::to_string(rep.methods[m]) << ',' << fixed_sig(e, 10) << ',' << fixed_sig(o, 10) << '\n';
    }
  }
  return s.str();
}

}  // namespace

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const sim::ReplicationReport rep = sim::run_replications(opt.spec, opt.methods, opt.reps, opt.threads);
    emit(opt.out_path, out, render_report(rep, opt.reproducible));
    if (!opt.qq_path.empty()) emit(opt.qq_path, out, render_qq(rep));
    return 0;
  } catch (const Error& e) {
    write_error(err, to_string(e.kind()), e.what());
    return exit_code(e.kind());
  }
}

}  // namespace bwmr::cli
