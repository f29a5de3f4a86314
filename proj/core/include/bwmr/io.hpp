#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bwmr/dataset.hpp"

namespace bwmr::io {

struct GwasRow {
  std::string snp;
  std::string effect_allele;
  std::string other_allele;
  double beta = 0.0;
  double se = 1.0;
  double pval = 1.0;
  std::optional<double> n;
  std::size_t line = 0;  // 1-based line in the source file
};

struct GwasTable {
  std::vector<GwasRow> rows;
  std::size_t dropped_multiallelic = 0;
};

// Tab-separated, header line first.  Required columns: snp, effect_allele,
// other_allele, beta, se, pval; optional n; others ignored.  CRLF accepted.
GwasTable read_gwas_tsv(const std::string& path);
GwasTable parse_gwas_tsv(std::istream& in, const std::string& source = "<stream>");

struct HarmonizedPair {
  std::string snp;
  GwasRow exposure;
  GwasRow outcome;  // alleles and sign aligned to the exposure effect allele
  bool flipped = false;         // outcome alleles were swapped, beta negated
  bool strand_flipped = false;  // matched after complementing the outcome alleles
  bool dropped_palindromic = false;
  bool dropped_mismatch = false;

  bool kept() const { return !dropped_palindromic && !dropped_mismatch; }
};

struct HarmonizeResult {
  std::vector<HarmonizedPair> pairs;  // exposure order, inner join
  std::size_t n_kept = 0;
  std::size_t n_flipped = 0;
  std::size_t n_palindromic = 0;
  std::size_t n_mismatch = 0;
};

HarmonizeResult harmonize(const GwasTable& exposure, const GwasTable& outcome,
                          bool drop_palindromic = true);

struct Selection {
  SummaryDataset data;
  std::size_t n_candidates = 0;
  std::vector<std::string> warnings;
};

// Keeps kept pairs with exposure p <= threshold.
Selection select_instruments(const HarmonizeResult& pairs, double pval_threshold = 5e-8);

// Internal dataset TSV: snp, gamma_hat, sigma_x, Gamma_hat, sigma_y at 17
// significant digits, so a round trip is exact.
void write_dataset_tsv(std::ostream& out, const SummaryDataset& data);
SummaryDataset read_dataset_tsv(std::istream& in);

}  // namespace bwmr::io
