#pragma once

#include <span>
#include <vector>

#include "lnmix/data.hpp"
#include "lnmix/patterns.hpp"

namespace lnmix {

// Parameters of the pattern-specific covariance
//   Sigma_p = error_var * I + gamma_var * J + tau_var * M_p.
// gamma_var = 0 gives the two-level covariance.
struct CovarianceSpec {
  double error_var = 1.0;
  double tau_var = 0.0;
  double gamma_var = 0.0;
  Pattern pattern;
};

// Group structure of one pattern resolved against a design: which condition
// sums add up to each group sum, plus group sizes. All density kernels work
// from this and per-gene sufficient statistics in O(I) time.
struct PatternLayout {
  std::vector<std::vector<int>> conds_by_group;
  std::vector<int> group_sizes;
  int n_units = 0;

  static PatternLayout from(const Pattern& p, const ConditionDesign& design);
};

// Log multivariate normal density of one gene vector with mean mu * 1 and
// the structured covariance above. Throws if error_var <= 0; all other
// variances only need to be nonnegative for Sigma_p to stay PD.
double log_density(std::span<const double> y, double mu, const CovarianceSpec& cov);

// Same quantity from sufficient statistics; the fast path used everywhere.
double log_density_stats(std::span<const double> cond_sums, double sum, double sumsq, const PatternLayout& layout,
                         double mu, double error_var, double tau_var, double gamma_var);

// Average of the density over an error-variance grid (equally weighted),
// computed as log of the mean via log-sum-exp.
double log_density_gv(std::span<const double> y, double mu, double tau_var, double gamma_var, const Pattern& pattern,
                      std::span<const double> variance_grid);

double log_density_gv_stats(std::span<const double> cond_sums, double sum, double sumsq, const PatternLayout& layout,
                            double mu, double tau_var, double gamma_var, std::span<const double> variance_grid);

// Batch evaluator over a data set and pattern set. Fills J x P matrices of
// log f_p(y_j | theta) for common or gene-specific error variances.
class DensityEvaluator {
 public:
  DensityEvaluator(const ExpressionMatrix& data, const PatternSet& patterns);

  int n_genes() const { return stats_.n_genes; }
  int n_patterns() const { return static_cast<int>(layouts_.size()); }
  const PatternLayout& layout(int p) const { return layouts_[p]; }
  const GeneStats& stats() const { return stats_; }

  // log_f is J x P row-major. error is either a single common variance
  // (size 1) or one variance per gene (size J).
  void fill_log_density(double mu, double tau_var, double gamma_var, std::span<const double> error,
                        int threads, std::vector<double>& log_f) const;

  // GV variant: every gene uses the same variance grid.
  void fill_log_density_gv(double mu, double tau_var, double gamma_var, std::span<const double> variance_grid,
                           int threads, std::vector<double>& log_f) const;

  // Sum over genes and patterns of weights[j][p] * log f_p(y_j | theta);
  // block-deterministic reduction. Weights of exactly zero are skipped.
  double weighted_log_density_sum(double mu, double tau_var, double gamma_var, std::span<const double> error,
                                  std::span<const double> weights, int threads) const;

 private:
  GeneStats stats_;
  std::vector<PatternLayout> layouts_;
};

}  // namespace lnmix
