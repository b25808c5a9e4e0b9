#pragma once

#include <span>

namespace lnmix {

// Digamma function psi(x) for x > 0.
double digamma(double x);

// Trigamma function psi'(x) for x > 0.
double trigamma(double x);

// Solve trigamma(x) = y for x > 0 by bisection. y must be positive.
double trigamma_inverse(double y);

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

// Chi-squared CDF with k degrees of freedom.
double chi2_cdf(double x, double k);

// Chi-squared quantile: smallest x with CDF(x) >= p, bisected to 1e-12
// relative width. p in (0, 1), k > 0.
double chi2_quantile(double p, double k);

// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

// Two-sided p-value for a t statistic with df degrees of freedom.
// df may be +infinity (normal reference).
double t_two_sided_p(double t, double df);

// Standard normal CDF.
double normal_cdf(double x);

// log(sum(exp(v))) guarded against overflow; -inf for empty or all -inf.
double log_sum_exp(std::span<const double> v);

}  // namespace lnmix
