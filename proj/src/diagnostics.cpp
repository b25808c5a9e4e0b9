#include "lnmix/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lnmix/special.hpp"

namespace lnmix {

double pair_covariance(const ExpressionMatrix& data, int unit_a, int unit_b) {
  const int nj = data.n_genes();
  if (unit_a == unit_b) throw std::invalid_argument("pair_covariance: units must differ");
  if (nj < 2) throw std::invalid_argument("pair_covariance: need at least two genes");
  const double ma = data.column_mean(unit_a), mb = data.column_mean(unit_b);
  double acc = 0.0;
  for (int j = 0; j < nj; ++j) acc += (data.at(j, unit_a) - ma) * (data.at(j, unit_b) - mb);
  return acc / (nj - 1);
}

double estimate_pi_ee(std::span<const double> pvalues, int bins) {
  if (pvalues.empty()) throw std::invalid_argument("estimate_pi_ee: empty p-value vector");
  if (bins < 2) throw std::invalid_argument("estimate_pi_ee: need at least 2 bins");
  std::vector<double> count(bins, 0.0);
  for (double p : pvalues) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("estimate_pi_ee: p-values must lie in [0,1]");
    const int b = std::min(bins - 1, static_cast<int>(p * bins));
    count[b] += 1.0;
  }
  const double nj = static_cast<double>(pvalues.size());
  double m = nj;
  for (int it = 0; it < 2 * bins; ++it) {
    const double expected = m / bins;
    int k = bins - 1;
    for (int b = 0; b < bins; ++b) {
      if (count[b] <= expected) {
        k = b;
        break;
      }
    }
    double tail = 0.0;
    for (int b = k; b < bins; ++b) tail += count[b];
    const double m_new = tail * bins / (bins - k);
    if (std::fabs(m_new - m) < 1e-9) {
      m = m_new;
      break;
    }
    m = m_new;
  }
  return std::clamp(m / nj, 0.0, 1.0);
}

std::vector<double> pairwise_pvalues(const ExpressionMatrix& data, const std::string& condition_a,
                                     const std::string& condition_b, const VariancePrior& prior) {
  const int ca = data.design.condition_index(condition_a);
  const int cb = data.design.condition_index(condition_b);
  if (ca < 0 || cb < 0 || ca == cb)
    throw std::invalid_argument("pairwise_pvalues: need two distinct conditions present in the design");

  const auto by_cond = data.design.units_by_condition();
  const auto& ua = by_cond[ca];
  const auto& ub = by_cond[cb];
  if (ua.empty() || ub.empty()) throw std::invalid_argument("pairwise_pvalues: empty condition");

  const SampleVariances sv = SampleVariances::from(data);
  const std::vector<double> shrunk =
      shrink(sv, prior, ShrinkRule::posterior_expectation, data.n_units(), data.design.n_conditions());
  const double df = std::isinf(prior.nu) ? std::numeric_limits<double>::infinity() : prior.nu + sv.df;
  const double inv_n = 1.0 / ua.size() + 1.0 / ub.size();

  std::vector<double> pvals(data.n_genes());
  for (int j = 0; j < data.n_genes(); ++j) {
    double ma = 0.0, mb = 0.0;
    for (int i : ua) ma += data.at(j, i);
    for (int i : ub) mb += data.at(j, i);
    ma /= ua.size();
    mb /= ub.size();
    const double t = (ma - mb) / std::sqrt(shrunk[j] * inv_n);
    pvals[j] = t_two_sided_p(t, df);
  }
  return pvals;
}

std::vector<CovarianceEvidence> evidence_table(const ExpressionMatrix& data, int bins) {
  const int nt = data.design.n_conditions();
  std::vector<CovarianceEvidence> rows;
  if (nt < 2) return rows;

  const auto by_cond = data.design.units_by_condition();

  // pooled same-condition covariance average over all replicate pairs
  double tau_bar = 0.0;
  int n_same = 0;
  for (const auto& units : by_cond) {
    for (size_t a = 0; a < units.size(); ++a)
      for (size_t b = a + 1; b < units.size(); ++b) {
        tau_bar += pair_covariance(data, units[a], units[b]);
        ++n_same;
      }
  }
  if (n_same > 0) tau_bar /= n_same;

  const VariancePrior prior = estimate_prior(SampleVariances::from(data));

  for (int a = 0; a < nt; ++a) {
    for (int b = a + 1; b < nt; ++b) {
      CovarianceEvidence row;
      row.pair = data.design.condition_names[a] + "," + data.design.condition_names[b];
      row.sigma_tau_bar = tau_bar;
      const std::vector<double> pv =
          pairwise_pvalues(data, data.design.condition_names[a], data.design.condition_names[b], prior);
      row.pi_ee_hat = estimate_pi_ee(pv, bins);
      row.predicted_cov = row.pi_ee_hat * tau_bar;
      double obs = 0.0;
      for (int i : by_cond[a])
        for (int i2 : by_cond[b]) obs += pair_covariance(data, i, i2);
      row.observed_cov = obs / (by_cond[a].size() * by_cond[b].size());
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace lnmix
