#include "lnmix/data.hpp"

namespace lnmix {

double ExpressionMatrix::grand_mean() const {
  double s = 0.0;
  for (double v : values) s += v;
  return values.empty() ? 0.0 : s / static_cast<double>(values.size());
}

double ExpressionMatrix::column_mean(int unit) const {
  double s = 0.0;
  for (int j = 0; j < n_genes(); ++j) s += at(j, unit);
  return n_genes() == 0 ? 0.0 : s / n_genes();
}

GeneStats GeneStats::from(const ExpressionMatrix& data) {
  GeneStats st;
  st.n_genes = data.n_genes();
  st.n_conditions = data.design.n_conditions();
  st.cond_sums.assign(static_cast<size_t>(st.n_genes) * st.n_conditions, 0.0);
  st.sums.assign(st.n_genes, 0.0);
  st.sumsq.assign(st.n_genes, 0.0);
  const int ni = data.n_units();
  for (int j = 0; j < st.n_genes; ++j) {
    const double* row = data.row(j);
    double* cs = st.cond_sums.data() + static_cast<size_t>(j) * st.n_conditions;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < ni; ++i) {
      const double v = row[i];
      cs[data.design.unit_condition[i]] += v;
      s += v;
      ss += v * v;
    }
    st.sums[j] = s;
    st.sumsq[j] = ss;
  }
  return st;
}

}  // namespace lnmix
