#pragma once

#include <limits>
#include <string>
#include <vector>

#include "lnmix/data.hpp"
#include "lnmix/density.hpp"
#include "lnmix/patterns.hpp"
#include "lnmix/variance_prior.hpp"

namespace lnmix {

enum class Model { LNN, LN3, LNNMV, LN3MV };

// The seven analysis methods. Plain LNNMV shrinks gene variances with the
// ebarrays denominator; the * variants use the posterior expectation; GV
// variants additionally integrate the variance prior when computing
// posterior pattern probabilities.
enum class Method { LNN, LNNMV, LNNMVstar, LNNGV, LN3, LN3MVstar, LN3GV };

Model model_of(Method m);
bool model_has_gene_effect(Model m);
bool model_gene_specific_error(Model m);
bool method_uses_gv(Method m);
ShrinkRule shrink_rule_of(Method m);
std::string method_name(Method m);
std::string model_name(Model m);
Method parse_method(const std::string& name);
Model parse_model(const std::string& name);

struct Hyperparams {
  Model model = Model::LNN;
  double mu = 0.0;
  double tau_var = 0.0;
  double gamma_var = 0.0;                // 0 for two-level models
  double error_var = 0.0;                // common-variance models
  std::vector<double> gene_error_var;    // MV models: fixed shrunken estimates
  VariancePrior prior;                   // MV models
  double var_floor = 0.0;                // clamp threshold for log-variance coords
};

struct EMConfig {
  double tol = 1e-8;
  int max_iter = 500;
  int threads = 1;
  int gv_quantiles = 1000;  // Q for GV posterior densities
  int nm_max_eval = 300;    // budget per M-step simplex search
};

struct EStepResult {
  std::vector<double> responsibilities;  // J x P row-major, rows sum to 1
  double loglik = 0.0;                   // log marginal likelihood at (theta, pi)
};

struct MStepResult {
  Hyperparams theta;
  std::vector<double> pi;
  bool clamped = false;
};

struct FitResult {
  Method method = Method::LNN;
  Hyperparams theta;
  std::vector<double> pi;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
  bool variance_clamped = false;
  std::vector<double> trace;  // log marginal likelihood per iteration
};

EStepResult e_step(const DensityEvaluator& eval, const Hyperparams& theta, std::span<const double> pi, int threads);
EStepResult e_step(const ExpressionMatrix& data, const PatternSet& patterns, const Hyperparams& theta,
                   std::span<const double> pi, int threads = 1);

MStepResult m_step(const DensityEvaluator& eval, std::span<const double> responsibilities, const Hyperparams& theta,
                   const EMConfig& config);
MStepResult m_step(const ExpressionMatrix& data, const PatternSet& patterns, std::span<const double> responsibilities,
                   const Hyperparams& theta, const EMConfig& config = {});

// Method-of-moments starting point (also computes shrunken variances and
// the variance prior for MV methods).
Hyperparams initial_hyperparams(const ExpressionMatrix& data, Method method);

FitResult fit(const ExpressionMatrix& data, const PatternSet& patterns, Method method, const EMConfig& config = {});

}  // namespace lnmix
