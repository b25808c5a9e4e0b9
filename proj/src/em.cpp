#include "lnmix/em.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lnmix/nelder_mead.hpp"
#include "lnmix/parallel.hpp"
#include "lnmix/special.hpp"

namespace lnmix {

Model model_of(Method m) {
  switch (m) {
    case Method::LNN: return Model::LNN;
    case Method::LN3: return Model::LN3;
    case Method::LNNMV:
    case Method::LNNMVstar:
    case Method::LNNGV: return Model::LNNMV;
    case Method::LN3MVstar:
    case Method::LN3GV: return Model::LN3MV;
  }
  throw std::logic_error("unknown method");
}

bool model_has_gene_effect(Model m) { return m == Model::LN3 || m == Model::LN3MV; }
bool model_gene_specific_error(Model m) { return m == Model::LNNMV || m == Model::LN3MV; }
bool method_uses_gv(Method m) { return m == Method::LNNGV || m == Method::LN3GV; }

ShrinkRule shrink_rule_of(Method m) {
  return m == Method::LNNMV ? ShrinkRule::ebarrays : ShrinkRule::posterior_expectation;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::LNN: return "LNN";
    case Method::LNNMV: return "LNNMV";
    case Method::LNNMVstar: return "LNNMV*";
    case Method::LNNGV: return "LNNGV";
    case Method::LN3: return "LN3";
    case Method::LN3MVstar: return "LN3MV*";
    case Method::LN3GV: return "LN3GV";
  }
  throw std::logic_error("unknown method");
}

std::string model_name(Model m) {
  switch (m) {
    case Model::LNN: return "LNN";
    case Model::LN3: return "LN3";
    case Model::LNNMV: return "LNNMV";
    case Model::LN3MV: return "LN3MV";
  }
  throw std::logic_error("unknown model");
}

Method parse_method(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "LNN") return Method::LNN;
  if (s == "LNNMV") return Method::LNNMV;
  if (s == "LNNMV*" || s == "LNNMVSTAR") return Method::LNNMVstar;
  if (s == "LNNGV") return Method::LNNGV;
  if (s == "LN3") return Method::LN3;
  if (s == "LN3MV*" || s == "LN3MVSTAR") return Method::LN3MVstar;
  if (s == "LN3GV") return Method::LN3GV;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected LNN, LNNMV, LNNMV*, LNNGV, LN3, LN3MV*, or LN3GV)");
}

Model parse_model(const std::string& name) {
  std::string s;
  for (char c : name) s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (s == "LNN") return Model::LNN;
  if (s == "LN3") return Model::LN3;
  if (s == "LNNMV") return Model::LNNMV;
  if (s == "LN3MV") return Model::LN3MV;
  throw std::invalid_argument("unknown model '" + name + "' (expected LNN, LN3, LNNMV, or LN3MV)");
}

namespace {

std::span<const double> error_span(const Hyperparams& theta, double* common_storage) {
  if (model_gene_specific_error(theta.model)) return {theta.gene_error_var};
  *common_storage = theta.error_var;
  return {common_storage, 1};
}

// Packs the free coordinates for the M-step: mu plus log of each variance
// component the model optimizes.
std::vector<double> pack(const Hyperparams& theta) {
  std::vector<double> x{theta.mu, std::log(std::max(theta.tau_var, 1e-300))};
  if (model_has_gene_effect(theta.model)) x.push_back(std::log(std::max(theta.gamma_var, 1e-300)));
  if (!model_gene_specific_error(theta.model)) x.push_back(std::log(std::max(theta.error_var, 1e-300)));
  return x;
}

void unpack(const std::vector<double>& x, Hyperparams& theta) {
  theta.mu = x[0];
  theta.tau_var = std::exp(std::min(x[1], 700.0));
  size_t k = 2;
  if (model_has_gene_effect(theta.model)) theta.gamma_var = std::exp(std::min(x[k++], 700.0));
  if (!model_gene_specific_error(theta.model)) theta.error_var = std::max(std::exp(std::min(x[k], 700.0)), 1e-300);
}

}  // namespace

EStepResult e_step(const DensityEvaluator& eval, const Hyperparams& theta, std::span<const double> pi, int threads) {
  const int nj = eval.n_genes(), np = eval.n_patterns();
  if (static_cast<int>(pi.size()) != np) throw std::invalid_argument("e_step: pi length must equal P");

  std::vector<double> log_pi(np);
  for (int p = 0; p < np; ++p) {
    if (pi[p] < 0.0) throw std::invalid_argument("e_step: negative mixing proportion");
    log_pi[p] = pi[p] > 0.0 ? std::log(pi[p]) : -std::numeric_limits<double>::infinity();
  }

  EStepResult out;
  double common = 0.0;
  eval.fill_log_density(theta.mu, theta.tau_var, theta.gamma_var, error_span(theta, &common), threads,
                        out.responsibilities);

  std::vector<double>& z = out.responsibilities;
  out.loglik = reduce_blocks(nj, threads, [&](size_t lo, size_t hi) {
    double acc = 0.0;
    for (size_t j = lo; j < hi; ++j) {
      double* row = z.data() + j * np;
      double mx = -std::numeric_limits<double>::infinity();
      for (int p = 0; p < np; ++p) {
        row[p] += log_pi[p];
        mx = std::max(mx, row[p]);
      }
      if (!std::isfinite(mx))
        throw std::runtime_error("e_step: no pattern has positive posterior mass for gene " + std::to_string(j + 1));
      double s = 0.0;
      for (int p = 0; p < np; ++p) {
        row[p] = std::exp(row[p] - mx);
        s += row[p];
      }
      for (int p = 0; p < np; ++p) row[p] /= s;
      acc += mx + std::log(s);
    }
    return acc;
  });
  return out;
}

EStepResult e_step(const ExpressionMatrix& data, const PatternSet& patterns, const Hyperparams& theta,
                   std::span<const double> pi, int threads) {
  DensityEvaluator eval(data, patterns);
  return e_step(eval, theta, pi, threads);
}

MStepResult m_step(const DensityEvaluator& eval, std::span<const double> responsibilities, const Hyperparams& theta,
                   const EMConfig& config) {
  const int nj = eval.n_genes(), np = eval.n_patterns();
  if (static_cast<int>(responsibilities.size()) != nj * np)
    throw std::invalid_argument("m_step: responsibilities must be J x P");

  MStepResult out;
  out.theta = theta;

  // exact closed-form update for the mixing proportions
  std::vector<double> colsum(np, 0.0);
  for (int j = 0; j < nj; ++j)
    for (int p = 0; p < np; ++p) colsum[p] += responsibilities[static_cast<size_t>(j) * np + p];
  double total = 0.0;
  for (double v : colsum) total += v;
  out.pi.resize(np);
  for (int p = 0; p < np; ++p) out.pi[p] = colsum[p] / total;

  // numeric update of theta: maximize sum_jp z_jp log f_p(y_j | theta) over
  // mu and the log-variance coordinates
  Hyperparams work = theta;
  auto objective = [&](const std::vector<double>& x) -> double {
    unpack(x, work);
    double common = 0.0;
    const double q = eval.weighted_log_density_sum(work.mu, work.tau_var, work.gamma_var, error_span(work, &common),
                                                   responsibilities, config.threads);
    return std::isnan(q) ? std::numeric_limits<double>::infinity() : -q;
  };

  const std::vector<double> x0 = pack(theta);
  const double q_base = -objective(x0);

  std::vector<double> steps(x0.size(), 0.25);
  steps[0] = 0.05 * (1.0 + std::fabs(theta.mu));

  NelderMeadOptions nm;
  nm.max_eval = config.nm_max_eval;
  NelderMeadResult best = nelder_mead_minimize(objective, x0, steps, nm);

  // walk variance coordinates toward zero while that keeps improving; the
  // simplex is slow along a coordinate running off to -inf in log space
  bool improved = true;
  while (improved) {
    improved = false;
    for (size_t k = 1; k < best.x.size(); ++k) {
      if (best.x[k] < -900.0) continue;
      std::vector<double> cand = best.x;
      cand[k] -= std::log(10.0);
      const double fc = objective(cand);
      if (fc < best.f) {
        best.x = std::move(cand);
        best.f = fc;
        improved = true;
      }
    }
  }

  const double q_new = -best.f;
  if (std::isfinite(q_new) && q_new > q_base + 1e-11 * (1.0 + std::fabs(q_base))) {
    unpack(best.x, out.theta);
  }

  // clamp collapsed variance components at the configured floor
  if (out.theta.var_floor > 0.0) {
    const double floor = out.theta.var_floor;
    if (out.theta.tau_var < floor) {
      out.theta.tau_var = floor;
      out.clamped = true;
    }
    if (model_has_gene_effect(out.theta.model) && out.theta.gamma_var < floor) {
      out.theta.gamma_var = floor;
      out.clamped = true;
    }
  }
  return out;
}

MStepResult m_step(const ExpressionMatrix& data, const PatternSet& patterns, std::span<const double> responsibilities,
                   const Hyperparams& theta, const EMConfig& config) {
  DensityEvaluator eval(data, patterns);
  return m_step(eval, responsibilities, theta, config);
}

Hyperparams initial_hyperparams(const ExpressionMatrix& data, Method method) {
  const Model model = model_of(method);
  const int nj = data.n_genes(), ni = data.n_units(), nt = data.design.n_conditions();
  if (nj < 1) throw std::invalid_argument("fit: empty expression matrix");

  Hyperparams theta;
  theta.model = model;
  theta.mu = data.grand_mean();

  double sigma0 = 0.0;
  if (ni > nt) {
    SampleVariances sv = SampleVariances::from(data);
    std::vector<double> s2 = sv.s2;
    std::nth_element(s2.begin(), s2.begin() + s2.size() / 2, s2.end());
    sigma0 = s2[s2.size() / 2];
    if (model_gene_specific_error(model)) {
      theta.prior = estimate_prior(sv);
      theta.gene_error_var = shrink(sv, theta.prior, shrink_rule_of(method), ni, nt);
    }
  } else {
    if (model_gene_specific_error(model))
      throw std::invalid_argument("fit: gene-specific variance methods need I - T >= 1");
    double var = 0.0;
    const double gm = theta.mu;
    for (double v : data.values) var += (v - gm) * (v - gm);
    var /= std::max<size_t>(data.values.size() - 1, 1);
    sigma0 = 0.1 * var;
  }
  if (!(sigma0 > 0.0)) sigma0 = 1e-6;
  theta.error_var = sigma0;
  theta.var_floor = 1e-12 * sigma0;

  // between-condition mean square, averaged over genes
  double bms = 0.0;
  if (nt >= 2) {
    const auto by_cond = data.design.units_by_condition();
    for (int j = 0; j < nj; ++j) {
      const double* row = data.row(j);
      double mean_of_means = 0.0;
      std::vector<double> cm(nt);
      for (int c = 0; c < nt; ++c) {
        double m = 0.0;
        for (int i : by_cond[c]) m += row[i];
        cm[c] = m / static_cast<double>(by_cond[c].size());
        mean_of_means += cm[c];
      }
      mean_of_means /= nt;
      double v = 0.0;
      for (int c = 0; c < nt; ++c) v += (cm[c] - mean_of_means) * (cm[c] - mean_of_means);
      bms += v / (nt - 1);
    }
    bms /= nj;
  }
  const double reps = static_cast<double>(ni) / nt;
  theta.tau_var = std::max(bms - sigma0 / reps, 0.01 * sigma0);

  if (model_has_gene_effect(model)) {
    double mean_of_gene_means = 0.0;
    std::vector<double> gm(nj);
    for (int j = 0; j < nj; ++j) {
      double m = 0.0;
      const double* row = data.row(j);
      for (int i = 0; i < ni; ++i) m += row[i];
      gm[j] = m / ni;
      mean_of_gene_means += gm[j];
    }
    mean_of_gene_means /= nj;
    double v = 0.0;
    for (int j = 0; j < nj; ++j) v += (gm[j] - mean_of_gene_means) * (gm[j] - mean_of_gene_means);
    v /= std::max(nj - 1, 1);
    theta.gamma_var = std::max(v - theta.tau_var, 0.01 * sigma0);
  }
  return theta;
}

FitResult fit(const ExpressionMatrix& data, const PatternSet& patterns, Method method, const EMConfig& config) {
  for (double v : data.values)
    if (!std::isfinite(v)) throw std::invalid_argument("fit: expression values must be finite");

  FitResult result;
  result.method = method;
  result.theta = initial_hyperparams(data, method);
  result.pi.assign(patterns.size(), 1.0 / patterns.size());
  if (config.max_iter <= 0) return result;

  DensityEvaluator eval(data, patterns);
  EStepResult es = e_step(eval, result.theta, result.pi, config.threads);
  result.trace.push_back(es.loglik);
  double prev = es.loglik;

  for (int it = 1; it <= config.max_iter; ++it) {
    MStepResult ms = m_step(eval, es.responsibilities, result.theta, config);
    result.theta = std::move(ms.theta);
    result.pi = std::move(ms.pi);
    result.variance_clamped = result.variance_clamped || ms.clamped;
    result.iterations = it;

    es = e_step(eval, result.theta, result.pi, config.threads);
    result.trace.push_back(es.loglik);
    if (std::fabs(es.loglik - prev) <= config.tol * (1.0 + std::fabs(es.loglik))) {
      result.converged = true;
      prev = es.loglik;
      break;
    }
    prev = es.loglik;
  }
  result.loglik = result.trace.back();
  return result;
}

}  // namespace lnmix
