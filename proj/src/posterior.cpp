#include "lnmix/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lnmix/parallel.hpp"

namespace lnmix {

PosteriorTable posteriors(const ExpressionMatrix& data, const PatternSet& patterns, const FitResult& fit,
                          Method method, const EMConfig& config) {
  if (fit.method != method)
    throw std::invalid_argument("posteriors: fit was produced by " + method_name(fit.method) + ", not " +
                                method_name(method));
  const int np = patterns.size();
  if (static_cast<int>(fit.pi.size()) != np)
    throw std::invalid_argument("posteriors: fit has " + std::to_string(fit.pi.size()) + " mixing proportions but " +
                                std::to_string(np) + " patterns were given");

  DensityEvaluator eval(data, patterns);
  const Hyperparams& theta = fit.theta;

  std::vector<double> log_f;
  if (method_uses_gv(method) && !theta.prior.common_variance) {
    const std::vector<double> grid = quantile_grid(theta.prior, config.gv_quantiles);
    eval.fill_log_density_gv(theta.mu, theta.tau_var, theta.gamma_var, grid, config.threads, log_f);
  } else if (method_uses_gv(method)) {
    // degenerate prior: the grid collapses to the common plug-in phi
    const double phi[1] = {theta.prior.phi};
    eval.fill_log_density(theta.mu, theta.tau_var, theta.gamma_var, {phi, 1}, config.threads, log_f);
  } else if (model_gene_specific_error(theta.model)) {
    eval.fill_log_density(theta.mu, theta.tau_var, theta.gamma_var, {theta.gene_error_var}, config.threads, log_f);
  } else {
    const double err[1] = {theta.error_var};
    eval.fill_log_density(theta.mu, theta.tau_var, theta.gamma_var, {err, 1}, config.threads, log_f);
  }

  std::vector<double> log_pi(np);
  for (int p = 0; p < np; ++p)
    log_pi[p] = fit.pi[p] > 0.0 ? std::log(fit.pi[p]) : -std::numeric_limits<double>::infinity();

  PosteriorTable table;
  table.gene_ids = data.gene_ids;
  table.n_patterns = np;
  table.method_label = method_name(method);
  table.probs.assign(log_f.size(), 0.0);

  const int nj = data.n_genes();
  for_each_block(nj, config.threads, [&](size_t, size_t lo, size_t hi) {
    for (size_t j = lo; j < hi; ++j) {
      const double* lf = log_f.data() + j * np;
      double* out = table.probs.data() + j * np;
      double mx = -std::numeric_limits<double>::infinity();
      for (int p = 0; p < np; ++p) mx = std::max(mx, lf[p] + log_pi[p]);
      if (!std::isfinite(mx))
        throw std::runtime_error("posteriors: no pattern has positive mass for gene " + std::to_string(j + 1));
      double s = 0.0;
      for (int p = 0; p < np; ++p) {
        out[p] = std::exp(lf[p] + log_pi[p] - mx);
        s += out[p];
      }
      for (int p = 0; p < np; ++p) out[p] /= s;
    }
  });

  if (auto null_idx = patterns.null_index()) {
    std::vector<double> eppee(nj);
    for (int j = 0; j < nj; ++j) eppee[j] = table.prob(j, *null_idx);
    table.eppee = std::move(eppee);
  }
  return table;
}

namespace {

const std::vector<double>& require_eppee(const PosteriorTable& table) {
  if (!table.eppee)
    throw std::invalid_argument("pattern set has no single-group pattern, so the ePPEE is undefined");
  return *table.eppee;
}

}  // namespace

std::vector<int> gene_list(const PosteriorTable& table, double threshold) {
  const std::vector<double>& eppee = require_eppee(table);
  std::vector<int> genes;
  for (int j = 0; j < table.n_genes(); ++j)
    if (eppee[j] < threshold) genes.push_back(j);
  std::sort(genes.begin(), genes.end(), [&](int a, int b) {
    if (eppee[a] != eppee[b]) return eppee[a] < eppee[b];
    return a < b;
  });
  return genes;
}

std::vector<std::pair<double, double>> eppee_cdf(const PosteriorTable& table) {
  const std::vector<double>& eppee = require_eppee(table);
  std::vector<double> sorted = eppee;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> cdf;
  const double nj = static_cast<double>(sorted.size());
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    cdf.emplace_back(sorted[i], static_cast<double>(i + 1) / nj);
  }
  return cdf;
}

std::vector<int> top_k(const PosteriorTable& table, int k) {
  const std::vector<double>& eppee = require_eppee(table);
  if (k > table.n_genes()) throw std::invalid_argument("top_k: K exceeds the number of genes");
  std::vector<int> order(table.n_genes());
  for (int j = 0; j < table.n_genes(); ++j) order[j] = j;
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    if (eppee[a] != eppee[b]) return eppee[a] < eppee[b];
    return a < b;
  });
  order.resize(k);
  return order;
}

std::vector<std::vector<int>> topk_overlap(const std::vector<PosteriorTable>& tables, int k) {
  if (tables.empty()) throw std::invalid_argument("topk_overlap: need at least one table");
  for (size_t t = 1; t < tables.size(); ++t)
    if (tables[t].gene_ids != tables[0].gene_ids)
      throw std::invalid_argument("topk_overlap: tables cover different gene universes");

  std::vector<std::vector<int>> tops;
  tops.reserve(tables.size());
  for (const auto& t : tables) {
    auto ids = top_k(t, k);
    std::sort(ids.begin(), ids.end());
    tops.push_back(std::move(ids));
  }

  const int n = static_cast<int>(tables.size());
  std::vector<std::vector<int>> overlap(n, std::vector<int>(n, 0));
  for (int a = 0; a < n; ++a) {
    overlap[a][a] = k;
    for (int b = a + 1; b < n; ++b) {
      std::vector<int> common;
      std::set_intersection(tops[a].begin(), tops[a].end(), tops[b].begin(), tops[b].end(),
                            std::back_inserter(common));
      overlap[a][b] = overlap[b][a] = static_cast<int>(common.size());
    }
  }
  return overlap;
}

}  // namespace lnmix
