#include "bwmr/io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "bwmr/error.hpp"

namespace bwmr::io {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string row_prefix(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

double parse_double(std::string_view field, const char* column, const std::string& source,
                    std::size_t line) {
  const std::string s(trim(field));
  char* end = nullptr;
  errno = 0;
  const double v = s.empty() ? 0.0 : std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::RowParse, row_prefix(source, line) + "cannot parse " + column + " value '" + s + "'");
  }
  return v;
}

char complement(char c) {
  switch (c) {
    case 'A': return 'T';
    case 'T': return 'A';
    case 'C': return 'G';
    case 'G': return 'C';
  }
  return c;
}

std::string complement(const std::string& s) {
  std::string out(s);
  for (char& c : out) c = complement(c);
  return out;
}

bool is_palindromic(const std::string& e, const std::string& o) { return complement(e) == o; }

}  // namespace

GwasTable parse_gwas_tsv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Schema, source + ": empty file, expected a header line");
  strip_cr(line);
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
  const auto header = split_tabs(line);
  auto find_col = [&](std::string_view name) -> long {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return static_cast<long>(i);
    return -1;
  };
  const char* required[] = {"snp", "effect_allele", "other_allele", "beta", "se", "pval"};
  long idx[6];
  for (int k = 0; k < 6; ++k) {
    idx[k] = find_col(required[k]);
    if (idx[k] < 0) throw Error(ErrorKind::Schema, source + ": missing mandatory column '" + required[k] + "'");
  }
  const long idx_n = find_col("n");
  const std::size_t needed = static_cast<std::size_t>(std::max(*std::max_element(idx, idx + 6), idx_n)) + 1;

  GwasTable table;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (trim(line).empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() < needed) {
      throw Error(ErrorKind::RowParse, row_prefix(source, lineno) + "expected at least " +
                                           std::to_string(needed) + " fields, got " + std::to_string(f.size()));
    }
    GwasRow r;
    r.line = lineno;
    r.snp = std::string(trim(f[idx[0]]));
    if (r.snp.empty()) throw Error(ErrorKind::RowParse, row_prefix(source, lineno) + "empty snp id");
    r.effect_allele = std::string(trim(f[idx[1]]));
    r.other_allele = std::string(trim(f[idx[2]]));
    bool multi = false;
    for (std::string* a : {&r.effect_allele, &r.other_allele}) {
      for (char& c : *a) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (a->find_first_of(",/") != std::string::npos) multi = true;
    }
    if (multi) {
      ++table.dropped_multiallelic;
      continue;
    }
    for (const std::string* a : {&r.effect_allele, &r.other_allele}) {
      if (a->empty() || a->find_first_not_of("ACGT") != std::string::npos) {
        throw Error(ErrorKind::RowParse, row_prefix(source, lineno) + "allele '" + *a + "' is not in {A,C,G,T}+");
      }
    }
    r.beta = parse_double(f[idx[3]], "beta", source, lineno);
    r.se = parse_double(f[idx[4]], "se", source, lineno);
    if (!(r.se > 0.0)) throw Error(ErrorKind::RowParse, row_prefix(source, lineno) + "se must be > 0");
    r.pval = parse_double(f[idx[5]], "pval", source, lineno);
    if (!(r.pval >= 0.0 && r.pval <= 1.0)) {
      throw Error(ErrorKind::RowParse, row_prefix(source, lineno) + "pval must lie in [0, 1]");
    }
    if (idx_n >= 0 && !trim(f[idx_n]).empty()) r.n = parse_double(f[idx_n], "n", source, lineno);
    table.rows.push_back(std::move(r));
  }

  std::unordered_set<std::string> seen;
  std::vector<std::string> dups;
  for (const auto& r : table.rows) {
    if (!seen.insert(r.snp).second) {
      if (std::find(dups.begin(), dups.end(), r.snp) == dups.end()) dups.push_back(r.snp);
    }
  }
  if (!dups.empty()) {
    std::string msg = source + ": duplicate snp ids (" + std::to_string(dups.size()) + "):";
    for (std::size_t k = 0; k < std::min<std::size_t>(3, dups.size()); ++k) msg += " " + dups[k];
    throw Error(ErrorKind::DuplicateKey, msg);
  }
  return table;
}

GwasTable read_gwas_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return parse_gwas_tsv(in, path);
}

HarmonizeResult harmonize(const GwasTable& exposure, const GwasTable& outcome, bool drop_palindromic) {
  std::unordered_map<std::string, const GwasRow*> by_id;
  by_id.reserve(outcome.rows.size());
  for (const auto& r : outcome.rows) by_id.emplace(r.snp, &r);

  HarmonizeResult res;
  for (const auto& ex : exposure.rows) {
    const auto it = by_id.find(ex.snp);
    if (it == by_id.end()) continue;
    HarmonizedPair p;
    p.snp = ex.snp;
    p.exposure = ex;
    p.outcome = *it->second;
    const std::string& e1 = ex.effect_allele;
    const std::string& o1 = ex.other_allele;
    const std::string& e2 = p.outcome.effect_allele;
    const std::string& o2 = p.outcome.other_allele;

    if (drop_palindromic && is_palindromic(e1, o1)) {
      p.dropped_palindromic = true;
      ++res.n_palindromic;
    } else if (e2 == e1 && o2 == o1) {
    } else if (e2 == o1 && o2 == e1) {
      p.flipped = true;
    } else if (complement(e2) == e1 && complement(o2) == o1) {
      p.strand_flipped = true;
    } else if (complement(e2) == o1 && complement(o2) == e1) {
      p.strand_flipped = true;
      p.flipped = true;
    } else {
      p.dropped_mismatch = true;
      ++res.n_mismatch;
    }
    if (p.kept()) {
      if (p.flipped) {
        p.outcome.beta = -p.outcome.beta;
        ++res.n_flipped;
      }
      p.outcome.effect_allele = e1;
      p.outcome.other_allele = o1;
      ++res.n_kept;
    }
    res.pairs.push_back(std::move(p));
  }
  if (res.pairs.empty()) {
    throw Error(ErrorKind::NoCommonInstruments, "exposure and outcome tables share no snp ids");
  }
  return res;
}

Selection select_instruments(const HarmonizeResult& h, double pval_threshold) {
  Selection sel;
  for (const auto& p : h.pairs) {
    if (!p.kept()) continue;
    ++sel.n_candidates;
    if (p.exposure.pval <= pval_threshold) {
      sel.data.push_back(p.exposure.beta, p.exposure.se, p.outcome.beta, p.outcome.se, p.snp);
    }
  }
  if (sel.data.size() < 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", pval_threshold);
    throw Error(ErrorKind::InsufficientInstruments, std::to_string(sel.data.size()) +
                                                        " instrument(s) pass exposure p <= " + buf + ", need 2");
  }
  if (sel.data.size() > 5000) {
    sel.warnings.push_back(std::to_string(sel.data.size()) +
                           " instruments selected; inputs are expected to be LD-clumped");
  }
  return sel;
}

void write_dataset_tsv(std::ostream& out, const SummaryDataset& d) {
  validate(d);
  out << "snp\tgamma_hat\tsigma_x\tGamma_hat\tsigma_y\n";
  char buf[160];
  for (std::size_t j = 0; j < d.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g\t%.17g\t%.17g\t%.17g", d.gamma_hat[j], d.sigma_x[j],
                  d.Gamma_hat[j], d.sigma_y[j]);
    out << (d.snp.empty() ? std::string(".") : d.snp[j]) << '\t' << buf << '\n';
  }
}

SummaryDataset read_dataset_tsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Schema, "dataset: empty input");
  strip_cr(line);
  if (line != "snp\tgamma_hat\tsigma_x\tGamma_hat\tsigma_y") {
    throw Error(ErrorKind::Schema, "dataset: unexpected header '" + line + "'");
  }
  SummaryDataset d;
  std::vector<std::string> ids;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    if (f.size() != 5) throw Error(ErrorKind::RowParse, row_prefix("dataset", lineno) + "expected 5 fields");
    ids.emplace_back(f[0]);
    d.gamma_hat.push_back(parse_double(f[1], "gamma_hat", "dataset", lineno));
    d.sigma_x.push_back(parse_double(f[2], "sigma_x", "dataset", lineno));
    d.Gamma_hat.push_back(parse_double(f[3], "Gamma_hat", "dataset", lineno));
    d.sigma_y.push_back(parse_double(f[4], "sigma_y", "dataset", lineno));
  }
  if (!std::all_of(ids.begin(), ids.end(), [](const std::string& s) { return s == "."; })) d.snp = std::move(ids);
  validate(d);
  return d;
}

}  // namespace bwmr::io
