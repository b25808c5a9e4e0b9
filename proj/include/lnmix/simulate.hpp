#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lnmix/data.hpp"
#include "lnmix/em.hpp"
#include "lnmix/posterior.hpp"

namespace lnmix {

// Generative specification with known truth. For MV models gene error
// variances are drawn from the scaled inverse chi-squared prior (nu, phi);
// otherwise error_var is shared.
struct SimSpec {
  Model model = Model::LNN;
  double mu = 0.0;
  double tau_var = 0.0;
  double gamma_var = 0.0;
  double error_var = 1.0;
  double nu = 0.0;
  double phi = 0.0;
  std::vector<double> pi;  // length P, simplex
  int genes = 0;
  ConditionDesign design;
  PatternSet patterns;
  uint64_t seed = 0;

  void validate() const;
};

struct TruthTable {
  std::vector<int> pattern;                      // per gene, 0-based index into the pattern set
  std::vector<std::vector<double>> group_means;  // per gene, one mean per group
  std::vector<double> sigma_j2;                  // per gene (MV models only, else empty)
  int null_pattern = -1;                         // index of the single-group pattern, -1 if absent

  bool is_ee(int gene) const { return pattern[gene] == null_pattern; }
};

// Draws one data set. Each gene has its own counter-based random stream
// keyed by (seed, gene index) with a fixed draw order (pattern, variance,
// gene effect, group effects, errors), so output is identical for any
// worker count.
std::pair<ExpressionMatrix, TruthTable> generate(const SimSpec& spec, int threads = 1);

struct CalibrationBin {
  double mean_eppee = 0.0;
  double ee_fraction = 0.0;
  int count = 0;
};

// Genes binned by ePPEE into equal-width bins; per bin the mean ePPEE and
// the empirical fraction of truly EE genes. Empty bins have count 0.
std::vector<CalibrationBin> calibration_score(const PosteriorTable& posteriors, const TruthTable& truth, int bins);

// ROC sweep over the ePPEE: one (false positives, true positives) point per
// distinct ePPEE value, in ascending ePPEE order.
std::vector<std::pair<int, int>> roc_points(const PosteriorTable& posteriors, const TruthTable& truth);

// Area under the ROC in [0, 1]; NaN if either class is empty.
double roc_area(const std::vector<std::pair<int, int>>& points, int n_ee, int n_de);
double roc_area(const PosteriorTable& posteriors, const TruthTable& truth);

}  // namespace lnmix
