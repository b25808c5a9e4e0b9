#pragma once

#include <vector>

#include "lnmix/data.hpp"

namespace lnmix {

// Pooled within-condition sample variances, one per gene, all with the same
// degrees of freedom d = I - T.
struct SampleVariances {
  std::vector<double> s2;
  double df = 0.0;
  std::vector<uint8_t> zero_flag;  // genes whose raw S^2 was exactly zero

  static SampleVariances from(const ExpressionMatrix& data);
};

// Scaled inverse chi-squared prior for gene error variances:
// nu * phi / sigma_j^2 ~ chi^2_nu. nu may be +inf when the data show no
// variance heterogeneity; GV methods then collapse to the plug-in phi.
struct VariancePrior {
  double nu = 0.0;
  double phi = 0.0;
  bool common_variance = false;  // set when nu is the +inf sentinel

  double cdf(double sigma2) const;  // CDF of the prior at sigma2
};

// Moment matching on log sample variances: e_j = log S_j^2 - digamma(d/2)
// + log(d/2); solve trigamma(nu/2) = var(e) - trigamma(d/2) for nu, then
// phi from the mean of e. Needs >= 10 genes and at least two distinct
// positive variances.
VariancePrior estimate_prior(const SampleVariances& sv);

enum class ShrinkRule {
  ebarrays,               // (nu*phi + (I-T)*S^2) / (nu + I - 2)
  posterior_expectation,  // (nu*phi + (I-T)*S^2) / (nu + (I-T) - 2)
};

std::vector<double> shrink(const SampleVariances& sv, const VariancePrior& prior, ShrinkRule rule, int n_units,
                           int n_conditions);

// Q quantiles of the prior: sigma*_q^2 = nu*phi / chi2_quantile(1 - q/(Q+1), nu),
// strictly increasing in q.
std::vector<double> quantile_grid(const VariancePrior& prior, int q_count);

}  // namespace lnmix
