#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace lnmix {

struct NelderMeadOptions {
  int max_eval = 400;
  double ftol = 1e-13;  // stop when simplex f-spread <= ftol * (1 + |fbest|)
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evals = 0;
};

// Deterministic downhill simplex minimizer. Start simplex is x0 plus one
// vertex per coordinate offset by steps[i].
inline NelderMeadResult nelder_mead_minimize(const std::function<double(const std::vector<double>&)>& fn,
                                             const std::vector<double>& x0, const std::vector<double>& steps,
                                             const NelderMeadOptions& opt = {}) {
  const size_t n = x0.size();
  std::vector<std::vector<double>> x(n + 1, x0);
  for (size_t i = 0; i < n; ++i) x[i + 1][i] += steps[i];

  int evals = 0;
  std::vector<double> f(n + 1);
  for (size_t v = 0; v <= n; ++v) {
    f[v] = fn(x[v]);
    ++evals;
  }

  std::vector<size_t> ord(n + 1);
  auto sort_order = [&] {
    std::iota(ord.begin(), ord.end(), size_t{0});
    std::stable_sort(ord.begin(), ord.end(), [&](size_t a, size_t b) { return f[a] < f[b]; });
  };

  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  while (evals < opt.max_eval) {
    sort_order();
    const size_t best = ord[0], worst = ord[n], second_worst = ord[n - 1];
    if (std::fabs(f[worst] - f[best]) <= opt.ftol * (1.0 + std::fabs(f[best]))) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (size_t v = 0; v <= n; ++v)
      if (v != worst)
        for (size_t i = 0; i < n; ++i) centroid[i] += x[v][i];
    for (size_t i = 0; i < n; ++i) centroid[i] /= static_cast<double>(n);

    for (size_t i = 0; i < n; ++i) xr[i] = centroid[i] + (centroid[i] - x[worst][i]);
    const double fr = fn(xr);
    ++evals;

    if (fr < f[best]) {
      for (size_t i = 0; i < n; ++i) xe[i] = centroid[i] + 2.0 * (xr[i] - centroid[i]);
      const double fe = fn(xe);
      ++evals;
      if (fe < fr) {
        x[worst] = xe;
        f[worst] = fe;
      } else {
        x[worst] = xr;
        f[worst] = fr;
      }
    } else if (fr < f[second_worst]) {
      x[worst] = xr;
      f[worst] = fr;
    } else {
      const bool outside = fr < f[worst];
      const std::vector<double>& base = outside ? xr : x[worst];
      for (size_t i = 0; i < n; ++i) xc[i] = centroid[i] + 0.5 * (base[i] - centroid[i]);
      const double fc = fn(xc);
      ++evals;
      if (fc < (outside ? fr : f[worst])) {
        x[worst] = xc;
        f[worst] = fc;
      } else {
        for (size_t v = 0; v <= n; ++v) {
          if (v == best) continue;
          for (size_t i = 0; i < n; ++i) x[v][i] = x[best][i] + 0.5 * (x[v][i] - x[best][i]);
          f[v] = fn(x[v]);
          ++evals;
        }
      }
    }
  }

  sort_order();
  return {x[ord[0]], f[ord[0]], evals};
}

}  // namespace lnmix
