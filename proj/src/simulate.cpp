#include "lnmix/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lnmix/parallel.hpp"
#include "lnmix/rng.hpp"
#include "lnmix/special.hpp"

namespace lnmix {

void SimSpec::validate() const {
  if (genes < 1) throw std::invalid_argument("simulate: need at least one gene");
  if (static_cast<int>(pi.size()) != patterns.size())
    throw std::invalid_argument("simulate: pi length must match the number of patterns");
  double total = 0.0;
  for (double p : pi) {
    if (p < 0.0) throw std::invalid_argument("simulate: negative mixing proportion");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw std::invalid_argument("simulate: mixing proportions must sum to 1");
  if (tau_var < 0.0 || gamma_var < 0.0) throw std::invalid_argument("simulate: negative variance component");
  if (model_gene_specific_error(model)) {
    if (!(nu > 0.0) || !(phi > 0.0)) throw std::invalid_argument("simulate: MV models need nu > 0 and phi > 0");
  } else if (!(error_var > 0.0)) {
    throw std::invalid_argument("simulate: error variance must be positive");
  }
  if (design.unit_condition != patterns.design.unit_condition)
    throw std::invalid_argument("simulate: design does not match the pattern set design");
}

std::pair<ExpressionMatrix, TruthTable> generate(const SimSpec& spec, int threads) {
  spec.validate();
  const int nj = spec.genes, ni = spec.design.n_units(), np = spec.patterns.size();
  const bool mv = model_gene_specific_error(spec.model);
  const bool gene_effect = model_has_gene_effect(spec.model);
  const double sd_tau = std::sqrt(spec.tau_var);
  const double sd_gamma = std::sqrt(spec.gamma_var);

  ExpressionMatrix data;
  data.design = spec.design;
  if (data.design.unit_names.empty()) {
    std::vector<int> rep(data.design.n_conditions(), 0);
    for (int i = 0; i < ni; ++i) {
      const int c = data.design.unit_condition[i];
      data.design.unit_names.push_back(data.design.condition_names[c] + ":" + std::to_string(++rep[c]));
    }
  }
  data.gene_ids.resize(nj);
  for (int j = 0; j < nj; ++j) data.gene_ids[j] = "g" + std::to_string(j + 1);
  data.values.assign(static_cast<size_t>(nj) * ni, 0.0);

  TruthTable truth;
  truth.pattern.resize(nj);
  truth.group_means.resize(nj);
  if (mv) truth.sigma_j2.resize(nj);
  if (auto idx = spec.patterns.null_index()) truth.null_pattern = *idx;

  std::vector<double> cum(np);
  double acc = 0.0;
  for (int p = 0; p < np; ++p) {
    acc += spec.pi[p];
    cum[p] = acc;
  }
  cum[np - 1] = 1.0;

  for_each_block(nj, threads, [&](size_t, size_t lo, size_t hi) {
    for (size_t j = lo; j < hi; ++j) {
      RandomStream rng(spec.seed, j);

      const double u = rng.uniform();
      int p = 0;
      while (cum[p] <= u && p + 1 < np) ++p;
      truth.pattern[j] = p;
      const Pattern& pat = spec.patterns.patterns[p];

      double err_sd;
      if (mv) {
        const double s2 = spec.nu * spec.phi / chi2_quantile(rng.uniform_open(), spec.nu);
        truth.sigma_j2[j] = s2;
        err_sd = std::sqrt(s2);
      } else {
        err_sd = std::sqrt(spec.error_var);
      }

      const double gamma = gene_effect ? sd_gamma * rng.normal() : 0.0;

      std::vector<double>& means = truth.group_means[j];
      means.resize(pat.n_groups);
      for (int g = 0; g < pat.n_groups; ++g) means[g] = spec.mu + gamma + sd_tau * rng.normal();

      double* row = data.values.data() + j * ni;
      for (int i = 0; i < ni; ++i) row[i] = means[pat.group_of_unit[i]] + err_sd * rng.normal();
    }
  });

  return {std::move(data), std::move(truth)};
}

std::vector<CalibrationBin> calibration_score(const PosteriorTable& posteriors, const TruthTable& truth, int bins) {
  if (!posteriors.eppee) throw std::invalid_argument("calibration: posterior table has no ePPEE column");
  if (truth.null_pattern < 0) throw std::invalid_argument("calibration: truth has no null pattern");
  const std::vector<double>& eppee = *posteriors.eppee;
  if (eppee.size() != truth.pattern.size())
    throw std::invalid_argument("calibration: gene universes differ");
  if (bins < 1) throw std::invalid_argument("calibration: need at least one bin");

  std::vector<CalibrationBin> out(bins);
  std::vector<double> ee_count(bins, 0.0), eppee_sum(bins, 0.0);
  for (size_t j = 0; j < eppee.size(); ++j) {
    const int b = std::min(bins - 1, static_cast<int>(eppee[j] * bins));
    eppee_sum[b] += eppee[j];
    if (truth.is_ee(static_cast<int>(j))) ee_count[b] += 1.0;
    ++out[b].count;
  }
  for (int b = 0; b < bins; ++b) {
    if (out[b].count > 0) {
      out[b].mean_eppee = eppee_sum[b] / out[b].count;
      out[b].ee_fraction = ee_count[b] / out[b].count;
    }
  }
  return out;
}

std::vector<std::pair<int, int>> roc_points(const PosteriorTable& posteriors, const TruthTable& truth) {
  if (!posteriors.eppee) throw std::invalid_argument("roc: posterior table has no ePPEE column");
  if (truth.null_pattern < 0) throw std::invalid_argument("roc: truth has no null pattern");
  const std::vector<double>& eppee = *posteriors.eppee;
  if (eppee.size() != truth.pattern.size()) throw std::invalid_argument("roc: gene universes differ");

  std::vector<int> order(eppee.size());
  for (size_t j = 0; j < order.size(); ++j) order[j] = static_cast<int>(j);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (eppee[a] != eppee[b]) return eppee[a] < eppee[b];
    return a < b;
  });

  std::vector<std::pair<int, int>> pts;
  int fp = 0, tp = 0;
  for (size_t r = 0; r < order.size(); ++r) {
    if (truth.is_ee(order[r]))
      ++fp;
    else
      ++tp;
    const bool last_of_value = r + 1 == order.size() || eppee[order[r + 1]] != eppee[order[r]];
    if (last_of_value) pts.emplace_back(fp, tp);
  }
  return pts;
}

double roc_area(const std::vector<std::pair<int, int>>& points, int n_ee, int n_de) {
  if (n_ee <= 0 || n_de <= 0) return std::numeric_limits<double>::quiet_NaN();
  double area = 0.0, px = 0.0, py = 0.0;
  for (const auto& [fp, tp] : points) {
    const double x = static_cast<double>(fp) / n_ee;
    const double y = static_cast<double>(tp) / n_de;
    area += (x - px) * 0.5 * (y + py);
    px = x;
    py = y;
  }
  area += (1.0 - px) * 0.5 * (py + 1.0);
  return area;
}

double roc_area(const PosteriorTable& posteriors, const TruthTable& truth) {
  int n_ee = 0;
  for (size_t j = 0; j < truth.pattern.size(); ++j)
    if (truth.is_ee(static_cast<int>(j))) ++n_ee;
  const int n_de = static_cast<int>(truth.pattern.size()) - n_ee;
  return roc_area(roc_points(posteriors, truth), n_ee, n_de);
}

}  // namespace lnmix
