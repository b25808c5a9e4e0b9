#include "lnmix/density.hpp"

#include <cmath>
#include <stdexcept>

#include "lnmix/parallel.hpp"
#include "lnmix/special.hpp"

namespace lnmix {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Core evaluation from centered group sums. With per-group block sizes n_g,
//   Sigma = err*I + tau * blockdiag(ones) + gamma * ones,
// Woodbury gives
//   x' Sigma^-1 x = (SS - sum_g tau/a_g * S_g^2)/err - gamma*u^2/(1+gamma*v)
//   log|Sigma|    = (I - G) log err + sum_g log a_g + log1p(gamma*v)
// with a_g = err + n_g*tau, u = sum_g S_g/a_g, v = sum_g n_g/a_g.
double core(const double* group_sums, const int* group_sizes, int n_groups, double ss, int n_units, double err,
            double tau, double gamma) {
  double logdet = (n_units - n_groups) * std::log(err);
  double weighted_sq = 0.0, u = 0.0, v = 0.0;
  for (int g = 0; g < n_groups; ++g) {
    const double a = err + group_sizes[g] * tau;
    logdet += std::log(a);
    const double s = group_sums[g];
    weighted_sq += tau / a * s * s;
    u += s / a;
    v += group_sizes[g] / a;
  }
  const double quad = (ss - weighted_sq) / err - gamma * u * u / (1.0 + gamma * v);
  logdet += std::log1p(gamma * v);
  return -0.5 * (n_units * kLog2Pi + logdet + quad);
}

void check_cov(double error_var, double tau_var, double gamma_var) {
  if (!(error_var > 0.0)) throw std::domain_error("log_density: covariance not positive definite (error_var <= 0)");
  if (tau_var < 0.0 || gamma_var < 0.0) throw std::domain_error("log_density: negative variance component");
}

}  // namespace

PatternLayout PatternLayout::from(const Pattern& p, const ConditionDesign& design) {
  if (static_cast<int>(p.group_of_unit.size()) != design.n_units())
    throw std::invalid_argument("pattern layout: pattern length does not match design");
  PatternLayout layout;
  layout.n_units = design.n_units();
  layout.conds_by_group.assign(p.n_groups, {});
  layout.group_sizes.assign(p.n_groups, 0);
  const auto sizes = design.condition_sizes();
  // register each condition under the group of its first unit; patterns
  // never split a condition so any unit of the condition works
  for (int c = 0; c < design.n_conditions(); ++c) {
    for (int i = 0; i < design.n_units(); ++i) {
      if (design.unit_condition[i] == c) {
        const int g = p.group_of_unit[i];
        layout.conds_by_group[g].push_back(c);
        layout.group_sizes[g] += sizes[c];
        break;
      }
    }
  }
  return layout;
}

double log_density(std::span<const double> y, double mu, const CovarianceSpec& cov) {
  check_cov(cov.error_var, cov.tau_var, cov.gamma_var);
  const Pattern& p = cov.pattern;
  const int ni = static_cast<int>(y.size());
  if (static_cast<int>(p.group_of_unit.size()) != ni)
    throw std::invalid_argument("log_density: pattern length does not match observation vector");
  std::vector<double> group_sums(p.n_groups, 0.0);
  std::vector<int> sizes(p.n_groups, 0);
  double ss = 0.0;
  for (int i = 0; i < ni; ++i) {
    const double x = y[i] - mu;
    group_sums[p.group_of_unit[i]] += x;
    ++sizes[p.group_of_unit[i]];
    ss += x * x;
  }
  return core(group_sums.data(), sizes.data(), p.n_groups, ss, ni, cov.error_var, cov.tau_var, cov.gamma_var);
}

double log_density_stats(std::span<const double> cond_sums, double sum, double sumsq, const PatternLayout& layout,
                         double mu, double error_var, double tau_var, double gamma_var) {
  check_cov(error_var, tau_var, gamma_var);
  const int n_groups = static_cast<int>(layout.group_sizes.size());
  std::vector<double> group_sums(n_groups, 0.0);
  for (int g = 0; g < n_groups; ++g) {
    double s = 0.0;
    for (int c : layout.conds_by_group[g]) s += cond_sums[c];
    group_sums[g] = s - mu * layout.group_sizes[g];
  }
  const double ss = sumsq - 2.0 * mu * sum + mu * mu * layout.n_units;
  return core(group_sums.data(), layout.group_sizes.data(), n_groups, ss, layout.n_units, error_var, tau_var,
              gamma_var);
}

double log_density_gv(std::span<const double> y, double mu, double tau_var, double gamma_var, const Pattern& pattern,
                      std::span<const double> variance_grid) {
  if (variance_grid.empty()) throw std::invalid_argument("log_density_gv: empty variance grid");
  std::vector<double> vals(variance_grid.size());
  CovarianceSpec cov{1.0, tau_var, gamma_var, pattern};
  for (size_t q = 0; q < variance_grid.size(); ++q) {
    cov.error_var = variance_grid[q];
    vals[q] = log_density(y, mu, cov);
  }
  return log_sum_exp(vals) - std::log(static_cast<double>(vals.size()));
}

double log_density_gv_stats(std::span<const double> cond_sums, double sum, double sumsq, const PatternLayout& layout,
                            double mu, double tau_var, double gamma_var, std::span<const double> variance_grid) {
  if (variance_grid.empty()) throw std::invalid_argument("log_density_gv: empty variance grid");
  std::vector<double> vals(variance_grid.size());
  for (size_t q = 0; q < variance_grid.size(); ++q)
    vals[q] = log_density_stats(cond_sums, sum, sumsq, layout, mu, variance_grid[q], tau_var, gamma_var);
  return log_sum_exp(vals) - std::log(static_cast<double>(vals.size()));
}

DensityEvaluator::DensityEvaluator(const ExpressionMatrix& data, const PatternSet& patterns)
    : stats_(GeneStats::from(data)) {
  layouts_.reserve(patterns.size());
  for (const Pattern& p : patterns.patterns) layouts_.push_back(PatternLayout::from(p, patterns.design));
}

void DensityEvaluator::fill_log_density(double mu, double tau_var, double gamma_var, std::span<const double> error,
                                        int threads, std::vector<double>& log_f) const {
  const int nj = stats_.n_genes, np = n_patterns();
  const bool common = error.size() == 1;
  if (!common && static_cast<int>(error.size()) != nj)
    throw std::invalid_argument("density: error variance count must be 1 or J");
  log_f.assign(static_cast<size_t>(nj) * np, 0.0);
  for_each_block(nj, threads, [&](size_t, size_t lo, size_t hi) {
    for (size_t j = lo; j < hi; ++j) {
      const double err = common ? error[0] : error[j];
      const std::span<const double> cs{stats_.cond_row(static_cast<int>(j)), static_cast<size_t>(stats_.n_conditions)};
      for (int p = 0; p < np; ++p)
        log_f[j * np + p] = log_density_stats(cs, stats_.sums[j], stats_.sumsq[j], layouts_[p], mu, err, tau_var,
                                              gamma_var);
    }
  });
}

void DensityEvaluator::fill_log_density_gv(double mu, double tau_var, double gamma_var,
                                           std::span<const double> variance_grid, int threads,
                                           std::vector<double>& log_f) const {
  const int nj = stats_.n_genes, np = n_patterns();
  const size_t nq = variance_grid.size();
  if (nq == 0) throw std::invalid_argument("density: empty variance grid");
  log_f.assign(static_cast<size_t>(nj) * np, 0.0);

  // gene-independent tables per (pattern, grid point): inverse error
  // variance, gamma/(1 + gamma*v), base log-determinant, and per-group
  // coefficients tau/a_g and 1/a_g
  struct PatternTable {
    std::vector<double> inv_err, shrink_gamma, base;  // size Q
    std::vector<double> coef_sq, coef_lin;            // size Q * n_groups
    int n_groups = 0;
  };
  std::vector<PatternTable> tables(np);
  for (int p = 0; p < np; ++p) {
    const PatternLayout& lay = layouts_[p];
    const int ng = static_cast<int>(lay.group_sizes.size());
    PatternTable& t = tables[p];
    t.n_groups = ng;
    t.inv_err.resize(nq);
    t.shrink_gamma.resize(nq);
    t.base.resize(nq);
    t.coef_sq.resize(nq * ng);
    t.coef_lin.resize(nq * ng);
    for (size_t q = 0; q < nq; ++q) {
      const double err = variance_grid[q];
      if (!(err > 0.0)) throw std::domain_error("density: grid variance must be positive");
      double logdet = (lay.n_units - ng) * std::log(err);
      double v = 0.0;
      for (int g = 0; g < ng; ++g) {
        const double a = err + lay.group_sizes[g] * tau_var;
        logdet += std::log(a);
        t.coef_sq[q * ng + g] = tau_var / a;
        t.coef_lin[q * ng + g] = 1.0 / a;
        v += lay.group_sizes[g] / a;
      }
      t.inv_err[q] = 1.0 / err;
      t.shrink_gamma[q] = gamma_var / (1.0 + gamma_var * v);
      t.base[q] = logdet + std::log1p(gamma_var * v);
    }
  }

  const double log_nq = std::log(static_cast<double>(nq));
  for_each_block(nj, threads, [&](size_t, size_t lo, size_t hi) {
    std::vector<double> vals(nq);
    std::vector<double> gsum(16);
    for (size_t j = lo; j < hi; ++j) {
      const double* cs = stats_.cond_row(static_cast<int>(j));
      for (int p = 0; p < np; ++p) {
        const PatternLayout& lay = layouts_[p];
        const PatternTable& t = tables[p];
        const int ng = t.n_groups;
        if (static_cast<int>(gsum.size()) < ng) gsum.resize(ng);
        for (int g = 0; g < ng; ++g) {
          double s = 0.0;
          for (int c : lay.conds_by_group[g]) s += cs[c];
          gsum[g] = s - mu * lay.group_sizes[g];
        }
        const double ss = stats_.sumsq[j] - 2.0 * mu * stats_.sums[j] + mu * mu * lay.n_units;
        for (size_t q = 0; q < nq; ++q) {
          double wsq = 0.0, u = 0.0;
          const double* csq = t.coef_sq.data() + q * ng;
          const double* clin = t.coef_lin.data() + q * ng;
          for (int g = 0; g < ng; ++g) {
            wsq += csq[g] * gsum[g] * gsum[g];
            u += clin[g] * gsum[g];
          }
          const double quad = (ss - wsq) * t.inv_err[q] - t.shrink_gamma[q] * u * u;
          vals[q] = -0.5 * (lay.n_units * kLog2Pi + t.base[q] + quad);
        }
        log_f[j * np + p] = log_sum_exp(vals) - log_nq;
      }
    }
  });
}

double DensityEvaluator::weighted_log_density_sum(double mu, double tau_var, double gamma_var,
                                                  std::span<const double> error, std::span<const double> weights,
                                                  int threads) const {
  const int nj = stats_.n_genes, np = n_patterns();
  const bool common = error.size() == 1;
  if (!common && static_cast<int>(error.size()) != nj)
    throw std::invalid_argument("density: error variance count must be 1 or J");
  if (static_cast<int>(weights.size()) != nj * np) throw std::invalid_argument("density: weights must be J x P");
  return reduce_blocks(nj, threads, [&](size_t lo, size_t hi) {
    double acc = 0.0;
    for (size_t j = lo; j < hi; ++j) {
      const double err = common ? error[0] : error[j];
      const std::span<const double> cs{stats_.cond_row(static_cast<int>(j)), static_cast<size_t>(stats_.n_conditions)};
      for (int p = 0; p < np; ++p) {
        const double w = weights[j * np + p];
        if (w == 0.0) continue;
        acc += w * log_density_stats(cs, stats_.sums[j], stats_.sumsq[j], layouts_[p], mu, err, tau_var, gamma_var);
      }
    }
    return acc;
  });
}

}  // namespace lnmix
