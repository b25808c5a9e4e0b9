#include "lnmix/variance_prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lnmix/special.hpp"

namespace lnmix {

SampleVariances SampleVariances::from(const ExpressionMatrix& data) {
  const int ni = data.n_units(), nt = data.design.n_conditions();
  const double df = ni - nt;
  if (df < 1.0)
    throw std::invalid_argument("sample variances: need I - T >= 1 (at least one condition with replicates)");
  SampleVariances sv;
  sv.df = df;
  sv.s2.resize(data.n_genes());
  sv.zero_flag.assign(data.n_genes(), 0);
  const auto by_cond = data.design.units_by_condition();
  for (int j = 0; j < data.n_genes(); ++j) {
    const double* row = data.row(j);
    double ssr = 0.0;
    for (const auto& units : by_cond) {
      double m = 0.0;
      for (int i : units) m += row[i];
      m /= static_cast<double>(units.size());
      for (int i : units) ssr += (row[i] - m) * (row[i] - m);
    }
    sv.s2[j] = ssr / df;
    if (sv.s2[j] == 0.0) sv.zero_flag[j] = 1;
  }
  return sv;
}

double VariancePrior::cdf(double sigma2) const {
  if (sigma2 <= 0.0) return 0.0;
  if (common_variance || std::isinf(nu)) return sigma2 >= phi ? 1.0 : 0.0;
  return 1.0 - chi2_cdf(nu * phi / sigma2, nu);
}

VariancePrior estimate_prior(const SampleVariances& sv) {
  const size_t nj = sv.s2.size();
  if (nj < 10) throw std::invalid_argument("variance prior: need at least 10 genes");
  double max_s2 = 0.0;
  for (double v : sv.s2) max_s2 = std::max(max_s2, v);
  if (max_s2 <= 0.0) throw std::invalid_argument("variance prior: all sample variances are zero");

  // floor zero variances at a tiny fraction of the median positive value so
  // quantized data do not drop genes from the moment equations
  std::vector<double> positive;
  positive.reserve(nj);
  for (double v : sv.s2)
    if (v > 0.0) positive.push_back(v);
  std::nth_element(positive.begin(), positive.begin() + positive.size() / 2, positive.end());
  const double eps = 1e-8 * positive[positive.size() / 2];

  const double half_d = 0.5 * sv.df;
  const double offset = -digamma(half_d) + std::log(half_d);
  double e_mean = 0.0;
  for (double v : sv.s2) e_mean += std::log(std::max(v, eps)) + offset;
  e_mean /= static_cast<double>(nj);
  double e_var = 0.0;
  for (double v : sv.s2) {
    const double e = std::log(std::max(v, eps)) + offset;
    e_var += (e - e_mean) * (e - e_mean);
  }
  e_var /= static_cast<double>(nj - 1);

  VariancePrior prior;
  const double target = e_var - trigamma(half_d);
  if (target <= 0.0) {
    // no excess dispersion beyond the chi-squared sampling noise: the genes
    // share one variance and the prior degenerates
    prior.nu = std::numeric_limits<double>::infinity();
    prior.phi = std::exp(e_mean - std::log(half_d) + digamma(half_d));
    prior.common_variance = true;
    return prior;
  }
  const double half_nu = std::min(trigamma_inverse(target), 5e7);
  prior.nu = 2.0 * half_nu;
  prior.phi = std::exp(e_mean + digamma(half_nu) - std::log(half_nu));
  return prior;
}

std::vector<double> shrink(const SampleVariances& sv, const VariancePrior& prior, ShrinkRule rule, int n_units,
                           int n_conditions) {
  const double d = n_units - n_conditions;
  if (d < 1.0) throw std::invalid_argument("shrink: need I - T >= 1");
  std::vector<double> out(sv.s2.size());
  if (prior.common_variance || std::isinf(prior.nu)) {
    std::fill(out.begin(), out.end(), prior.phi);
    return out;
  }
  const double denom =
      rule == ShrinkRule::ebarrays ? prior.nu + n_units - 2.0 : prior.nu + d - 2.0;
  if (!(denom > 0.0)) throw std::domain_error("shrink: non-positive denominator (nu too small for design)");
  for (size_t j = 0; j < sv.s2.size(); ++j) out[j] = (prior.nu * prior.phi + d * sv.s2[j]) / denom;
  return out;
}

std::vector<double> quantile_grid(const VariancePrior& prior, int q_count) {
  if (q_count < 1) throw std::invalid_argument("quantile grid: Q must be >= 1");
  if (prior.common_variance || std::isinf(prior.nu) || !(prior.nu > 0.0) || !(prior.phi > 0.0))
    throw std::invalid_argument("quantile grid: prior must have finite positive nu and phi");
  std::vector<double> grid(q_count);
  for (int q = 1; q <= q_count; ++q) {
    const double tail = 1.0 - static_cast<double>(q) / (q_count + 1);
    grid[q - 1] = prior.nu * prior.phi / chi2_quantile(tail, prior.nu);
  }
  return grid;
}

}  // namespace lnmix
