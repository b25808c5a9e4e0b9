#include "lnmix/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lnmix {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: x must be positive");
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / x;
  const double r2 = r * r;
  // asymptotic expansion, Bernoulli terms through x^-10
  double v = std::log(x) - 0.5 * r -
             r2 * (1.0 / 12.0 - r2 * (1.0 / 120.0 - r2 * (1.0 / 252.0 - r2 * (1.0 / 240.0 - r2 * (1.0 / 132.0)))));
  return v + acc;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("trigamma: x must be positive");
  double acc = 0.0;
  while (x < 6.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  const double r = 1.0 / x;
  const double r2 = r * r;
  double v = r * (1.0 + 0.5 * r +
                  r * (1.0 / 6.0 - r2 * (1.0 / 30.0 - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0 - r2 * 5.0 / 66.0)))));
  return v + acc;
}

double trigamma_inverse(double y) {
  if (!(y > 0.0)) throw std::domain_error("trigamma_inverse: y must be positive");
  // trigamma is strictly decreasing on (0, inf): trigamma(x) ~ 1/x^2 as x->0,
  // ~ 1/x as x->inf.
  double lo = 1e-300, hi = 1.0;
  while (trigamma(hi) > y && hi < 1e12) hi *= 2.0;
  if (trigamma(hi) > y) return hi;  // y below reachable range: effectively infinite x
  // shrink lo up from a crude starting point to keep iterations bounded
  lo = 1e-8;
  while (trigamma(lo) < y) lo *= 0.5;
  for (int it = 0; it < 500; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (trigamma(mid) > y)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-14 * hi) break;
  }
  return 0.5 * (lo + hi);
}

namespace {

// series expansion for P(a,x), x < a+1
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 1000; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// continued fraction for Q(a,x) = 1 - P(a,x), x >= a+1 (modified Lentz)
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("gamma_p: a must be positive");
  if (x < 0.0) throw std::domain_error("gamma_p: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double chi2_cdf(double x, double k) {
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * k, 0.5 * x);
}

double chi2_quantile(double p, double k) {
  if (!(k > 0.0)) throw std::domain_error("chi2_quantile: k must be positive");
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("chi2_quantile: p must be in (0,1)");
  double hi = k + 10.0 * std::sqrt(2.0 * k) + 50.0;
  while (chi2_cdf(hi, k) < p) {
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("chi2_quantile: no convergence");
  }
  double lo = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (chi2_cdf(mid, k) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-12 * hi) break;
  }
  return 0.5 * (lo + hi);
}

namespace {

double beta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 1000; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace

double beta_inc(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw std::domain_error("beta_inc: a, b must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  const double front = std::exp(lbeta + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double t_two_sided_p(double t, double df) {
  const double at = std::fabs(t);
  if (std::isnan(at)) return std::numeric_limits<double>::quiet_NaN();
  if (!(df > 0.0)) throw std::domain_error("t_two_sided_p: df must be positive");
  if (std::isinf(df) || df > 1e7) return std::erfc(at / std::sqrt(2.0));
  return beta_inc(0.5 * df, 0.5, df / (df + at * at));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double log_sum_exp(std::span<const double> v) {
  double m = -kInf;
  for (double x : v)
    if (x > m) m = x;
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace lnmix
