#include "bwmr/dataset.hpp"

#include <cmath>

#include "bwmr/error.hpp"

namespace bwmr {

void SummaryDataset::reserve(std::size_t n) {
  gamma_hat.reserve(n);
  sigma_x.reserve(n);
  Gamma_hat.reserve(n);
  sigma_y.reserve(n);
}

void SummaryDataset::push_back(double gh, double sx, double Gh, double sy, std::string id) {
  gamma_hat.push_back(gh);
  sigma_x.push_back(sx);
  Gamma_hat.push_back(Gh);
  sigma_y.push_back(sy);
  if (!id.empty() || !snp.empty()) {
    snp.resize(gamma_hat.size() - 1);
    snp.push_back(std::move(id));
  }
}

void validate(const SummaryDataset& data) {
  const std::size_t n = data.gamma_hat.size();
  if (data.sigma_x.size() != n || data.Gamma_hat.size() != n || data.sigma_y.size() != n) {
    throw Error(ErrorKind::InvalidInput, "dataset columns have different lengths");
  }
  if (!data.snp.empty() && data.snp.size() != n) {
    throw Error(ErrorKind::InvalidInput, "snp id column length does not match data");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(data.gamma_hat[j]) || !std::isfinite(data.Gamma_hat[j])) {
      throw Error(ErrorKind::InvalidInput, "non-finite effect estimate at index " + std::to_string(j));
    }
    if (!(data.sigma_x[j] > 0.0) || !std::isfinite(data.sigma_x[j]) ||
        !(data.sigma_y[j] > 0.0) || !std::isfinite(data.sigma_y[j])) {
      throw Error(ErrorKind::InvalidInput, "standard errors must be finite and > 0 (index " +
                                               std::to_string(j) + ")");
    }
  }
}

SummaryDataset permuted(const SummaryDataset& data, const std::vector<std::size_t>& order) {
  SummaryDataset out;
  out.reserve(order.size());
  for (std::size_t k : order) {
    out.gamma_hat.push_back(data.gamma_hat.at(k));
    out.sigma_x.push_back(data.sigma_x.at(k));
    out.Gamma_hat.push_back(data.Gamma_hat.at(k));
    out.sigma_y.push_back(data.sigma_y.at(k));
    if (!data.snp.empty()) out.snp.push_back(data.snp.at(k));
  }
  return out;
}

}  // namespace bwmr
