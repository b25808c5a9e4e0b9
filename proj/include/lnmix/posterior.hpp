#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lnmix/em.hpp"

namespace lnmix {

// Per-gene posterior pattern probabilities. eppee is the column of the
// single-group pattern and is absent when the pattern set has none.
struct PosteriorTable {
  std::vector<std::string> gene_ids;
  int n_patterns = 0;
  std::vector<double> probs;  // J x P row-major, rows sum to 1
  std::optional<std::vector<double>> eppee;
  std::string method_label;

  int n_genes() const { return static_cast<int>(gene_ids.size()); }
  double prob(int gene, int pattern) const { return probs[static_cast<size_t>(gene) * n_patterns + pattern]; }
};

// Posterior pattern probabilities under a fitted method. Plug-in methods
// evaluate densities at the point variance estimates; GV methods average
// the density over the Q-point variance prior grid.
PosteriorTable posteriors(const ExpressionMatrix& data, const PatternSet& patterns, const FitResult& fit,
                          Method method, const EMConfig& config = {});

// Genes with ePPEE strictly below the threshold, sorted by ascending ePPEE
// with ties broken by gene index. Throws when the table has no ePPEE.
std::vector<int> gene_list(const PosteriorTable& table, double threshold);

// Empirical CDF sample of the ePPEE column: (value, fraction <= value),
// one entry per distinct value.
std::vector<std::pair<double, double>> eppee_cdf(const PosteriorTable& table);

// Pairwise sizes of intersections between the K smallest-ePPEE gene lists.
std::vector<std::vector<int>> topk_overlap(const std::vector<PosteriorTable>& tables, int k);

// The K genes with smallest ePPEE (ties by index), used by topk_overlap.
std::vector<int> top_k(const PosteriorTable& table, int k);

}  // namespace lnmix
