#pragma once

#include <string>
#include <vector>

#include "lnmix/data.hpp"
#include "lnmix/variance_prior.hpp"

namespace lnmix {

// Across-gene covariance between two unit columns, centered at the
// across-gene column means, denominator J - 1. For same-condition units
// this estimates the treatment-effect variance (plus the gene-effect
// variance when one is present).
double pair_covariance(const ExpressionMatrix& data, int unit_a, int unit_b);

// Histogram-based estimate of the fraction of null (uniform) p-values.
// Fixed-point iteration: starting from all-null, repeatedly find the first
// bin whose count drops to the expected uniform level and rescale the count
// in that bin and above to the full range.
double estimate_pi_ee(std::span<const double> pvalues, int bins = 20);

// Two-sided moderated-t p-values comparing two conditions, with
// posterior-expectation shrunken variances and nu + (I - T) degrees of
// freedom.
std::vector<double> pairwise_pvalues(const ExpressionMatrix& data, const std::string& condition_a,
                                     const std::string& condition_b, const VariancePrior& prior);

struct CovarianceEvidence {
  std::string pair;          // "condA,condB"
  double pi_ee_hat = 0.0;    // estimated EE fraction between the conditions
  double sigma_tau_bar = 0.0;  // pooled same-condition covariance average
  double predicted_cov = 0.0;  // pi_ee_hat * sigma_tau_bar
  double observed_cov = 0.0;   // average cross-condition covariance
};

// One row per condition pair. sigma_tau_bar pools same-condition unit pairs
// across all conditions and is repeated on every row.
std::vector<CovarianceEvidence> evidence_table(const ExpressionMatrix& data, int bins = 20);

}  // namespace lnmix
