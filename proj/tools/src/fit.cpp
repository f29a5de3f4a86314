#include <algorithm>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bwmr/baselines.hpp"
#include "bwmr/cli/cli.hpp"
#include "bwmr/error.hpp"
#include "bwmr/io.hpp"
#include "bwmr/lrvb.hpp"
#include "output.hpp"

namespace bwmr::cli {

namespace {

using nlohmann::ordered_json;

struct Record {
  std::string method;
  double beta_hat = 0.0;
  double se = 0.0;
  double z = 0.0;
  double pval = 1.0;
  std::size_t n_snps = 0;
  std::size_t n_removed = 0;
  ordered_json diagnostics = ordered_json::object();
  std::optional<Error> error;
};

Record run_bwmr(const SummaryDataset& d) {
  Record r;
  const CausalEstimate e = estimate(d);
  r.beta_hat = e.beta_hat;
  r.se = e.se;
  r.z = e.z;
  r.pval = e.p_value;
  double min_w = 1.0;
  std::size_t low = 0;
  ordered_json weights = ordered_json::array();
  for (double w : e.weights) {
    min_w = std::min(min_w, w);
    if (w < 0.5) ++low;
    weights.push_back(number(w));
  }
  auto& g = r.diagnostics;
  g["se_mfvb"] = number(e.se_mfvb);
  g["tau_sq"] = number(e.tau_sq);
  g["sigma_sq"] = number(e.sigma_sq);
  g["iterations"] = e.iterations;
  g["converged"] = e.converged;
  g["elbo"] = number(e.elbo_trace.empty() ? 0.0 : e.elbo_trace.back());
  g["n_weight_below_half"] = low;
  g["min_weight"] = number(min_w);
  g["weights"] = std::move(weights);
  g["warnings"] = e.warnings;
  return r;
}

Record from_baseline(const baselines::BaselineEstimate& b, const SummaryDataset& d) {
  Record r;
  r.beta_hat = b.beta_hat;
  r.se = b.se;
  r.z = b.z;
  r.pval = b.p_value;
  r.n_removed = b.removed_snps.size();
  auto& g = r.diagnostics;
  g["degenerate_fit"] = b.degenerate_fit;
  switch (b.method) {
    case baselines::Method::Egger:
      g["intercept"] = number(b.intercept);
      g["intercept_se"] = number(b.intercept_se);
      break;
    case baselines::Method::GSMR: {
      g["target_snp"] = d.snp.empty() ? std::to_string(b.target_snp) : d.snp[b.target_snp];
      ordered_json removed = ordered_json::array();
      for (std::size_t j : b.removed_snps) removed.push_back(d.snp.empty() ? std::to_string(j) : d.snp[j]);
      g["removed_snps"] = std::move(removed);
      break;
    }
    case baselines::Method::RAPS:
      g["tau_sq"] = number(b.tau_sq);
      break;
    case baselines::Method::IVW:
      break;
  }
  return r;
}

Record run_one(sim::Estimator m, const SummaryDataset& d) {
  Record r;
  try {
    switch (m) {
      case sim::Estimator::BWMR: r = run_bwmr(d); break;
      case sim::Estimator::IVW: r = from_baseline(baselines::ivw(d), d); break;
      case sim::Estimator::Egger: r = from_baseline(baselines::egger(d), d); break;
      case sim::Estimator::GSMR: r = from_baseline(baselines::gsmr_lite(d), d); break;
      case sim::Estimator::RAPS: r = from_baseline(baselines::raps_lite(d), d); break;
    }
  } catch (const Error& e) {
    r = Record{};
    r.error = e;
  }
  r.method = std::string(sim::to_string(m));
  r.n_snps = d.size();
  return r;
}

std::string render_json(const std::vector<Record>& records, const ordered_json& provenance,
                        const std::vector<std::string>& warnings) {
  ordered_json root;
  ordered_json results = ordered_json::array();
  for (const auto& r : records) {
    ordered_json j;
    j["method"] = r.method;
    if (r.error) {
      j["beta_hat"] = nullptr;
      j["se"] = nullptr;
      j["z"] = nullptr;
      j["pval"] = nullptr;
    } else {
      j["beta_hat"] = number(r.beta_hat);
      j["se"] = number(r.se);
      j["z"] = number(r.z);
      j["pval"] = number(r.pval);
    }
    j["n_snps"] = r.n_snps;
    j["n_removed"] = r.n_removed;
    j["diagnostics"] = r.diagnostics;
    if (r.error) {
      j["error"] = {{"kind", std::string(to_string(r.error->kind()))}, {"message", r.error->what()}};
    }
    results.push_back(std::move(j));
  }
  root["results"] = std::move(results);
  root["warnings"] = warnings;
  root["provenance"] = provenance;
  return root.dump(2) + "\n";
}

std::string render_tsv(const std::vector<Record>& records) {
  std::ostringstream s;
  s << "method\tbeta_hat\tse\tz\tpval\tn_snps\n";
  for (const auto& r : records) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s << r.method << '\t' << fixed_sig(r.error ? nan : r.beta_hat) << '\t' << fixed_sig(r.error ? nan : r.se)
      << '\t' << fixed_sig(r.error ? nan : r.z) << '\t' << fixed_sig(r.error ? nan : r.pval) << '\t'
      << r.n_snps << '\n';
  }
  return s.str();
}

}  // namespace

int cmd_fit(const FitOptions& opt, std::ostream& out, std::ostream& err) {
  try {
    const io::GwasTable ex = io::read_gwas_tsv(opt.exposure);
    const io::GwasTable oc = io::read_gwas_tsv(opt.outcome);
    const io::HarmonizeResult h = io::harmonize(ex, oc, !opt.keep_palindromic);
    io::Selection sel = io::select_instruments(h, opt.pval_threshold);

    std::vector<std::string> warnings;
    if (ex.dropped_multiallelic + oc.dropped_multiallelic > 0) {
      warnings.push_back(std::to_string(ex.dropped_multiallelic + oc.dropped_multiallelic) +
                         " multi-allelic row(s) dropped");
    }
    if (h.n_palindromic > 0) warnings.push_back(std::to_string(h.n_palindromic) + " palindromic SNP(s) dropped");
    if (h.n_mismatch > 0) warnings.push_back(std::to_string(h.n_mismatch) + " allele-mismatched SNP(s) dropped");
    for (auto& w : sel.warnings) warnings.push_back(std::move(w));

    std::vector<Record> records;
    for (sim::Estimator m : opt.methods) records.push_back(run_one(m, sel.data));

    std::string text;
    if (opt.format == Format::Json) {
      ordered_json prov;
      prov["tool"] = "bwmr";
      prov["version"] = BWMR_VERSION;
      prov["inputs"] = {
          {"exposure", {{"file", basename_of(opt.exposure)}, {"sha256", sha256_file(opt.exposure)}}},
          {"outcome", {{"file", basename_of(opt.outcome)}, {"sha256", sha256_file(opt.outcome)}}}};
      ordered_json methods = ordered_json::array();
      for (sim::Estimator m : opt.methods) methods.push_back(std::string(sim::to_string(m)));
      prov["config"] = {{"pval_threshold", number(opt.pval_threshold)},
                        {"methods", methods},
                        {"keep_palindromic", opt.keep_palindromic},
                        {"seed", opt.seed}};
      prov["harmonization"] = {{"n_exposure_rows", ex.rows.size()},
                               {"n_outcome_rows", oc.rows.size()},
                               {"n_common", h.pairs.size()},
                               {"n_kept", h.n_kept},
                               {"n_flipped", h.n_flipped},
                               {"n_palindromic", h.n_palindromic},
                               {"n_mismatch", h.n_mismatch},
                               {"n_selected", sel.data.size()}};
      if (!opt.reproducible) prov["timestamp"] = utc_timestamp();
      text = render_json(records, prov, warnings);
    } else {
      text = render_tsv(records);
      for (const auto& w : warnings) err << ordered_json{{"warning", w}}.dump() << '\n';
    }
    emit(opt.out_path, out, text);

    for (const auto& r : records) {
      if (r.error) {
        write_error(err, to_string(r.error->kind()), r.method + ": " + r.error->what());
        return exit_code(r.error->kind());
      }
    }
    return 0;
  } catch (const Error& e) {
    write_error(err, to_string(e.kind()), e.what());
    return exit_code(e.kind());
  }
}

}  // namespace bwmr::cli
