#pragma once

#include <string>
#include <vector>

#include "lnmix/patterns.hpp"

namespace lnmix {

// J x I log-scale expression matrix, row-major, with gene ids and the unit
// design parsed from the column header.
struct ExpressionMatrix {
  std::vector<std::string> gene_ids;  // size J
  ConditionDesign design;
  std::vector<double> values;  // size J * I

  int n_genes() const { return static_cast<int>(gene_ids.size()); }
  int n_units() const { return design.n_units(); }

  double at(int gene, int unit) const { return values[static_cast<size_t>(gene) * n_units() + unit]; }
  const double* row(int gene) const { return values.data() + static_cast<size_t>(gene) * n_units(); }

  double grand_mean() const;
  // across-gene mean of one unit column
  double column_mean(int unit) const;
};

// Per-gene sufficient statistics for the structured normal densities:
// per-condition sums, total sum and total sum of squares. Patterns merge
// whole conditions, so group sums are sums of condition sums.
struct GeneStats {
  int n_genes = 0;
  int n_conditions = 0;
  std::vector<double> cond_sums;  // J x T row-major
  std::vector<double> sums;       // J
  std::vector<double> sumsq;      // J

  static GeneStats from(const ExpressionMatrix& data);
  const double* cond_row(int gene) const { return cond_sums.data() + static_cast<size_t>(gene) * n_conditions; }
};

}  // namespace lnmix
