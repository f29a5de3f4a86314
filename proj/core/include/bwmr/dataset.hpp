#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace bwmr {

// Summary statistics for N instruments: exposure associations gamma_hat with
// standard errors sigma_x, outcome associations Gamma_hat with sigma_y.
struct SummaryDataset {
  std::vector<std::string> snp;  // may be empty for synthetic data
  std::vector<double> gamma_hat;
  std::vector<double> sigma_x;
  std::vector<double> Gamma_hat;
  std::vector<double> sigma_y;

  std::size_t size() const { return gamma_hat.size(); }

  void reserve(std::size_t n);
  void push_back(double gh, double sx, double Gh, double sy, std::string id = {});
};

// Throws InvalidInput on ragged columns, non-finite values or
// non-positive standard errors.  Does not check N >= 2.
void validate(const SummaryDataset& data);

// Reorders every column by `order` (a permutation of 0..N-1).
SummaryDataset permuted(const SummaryDataset& data, const std::vector<std::size_t>& order);

}  // namespace bwmr
