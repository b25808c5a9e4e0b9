#include <CLI11.hpp>

#include "lnmix/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical lognormal mixture models for log-scale expression matrices"};
  app.require_subcommand(1);

  lnmix::RunConfig cfg;

  auto add_pattern_flags = [&](CLI::App* sub) {
    sub->add_option("--patterns", cfg.pattern_file, "pattern file (one pattern per line, one group index per condition)");
    sub->add_flag("--all-partitions", cfg.all_partitions, "use every set-partition of the conditions");
    sub->add_option("--vs-control", cfg.vs_control, "each-vs-control patterns with the named control condition");
  };
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--threads", cfg.threads, "gene-parallel worker count")->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out_dir, "output directory")->required();
  };

  CLI::App* fit = app.add_subcommand("fit", "fit a method by marginal-likelihood EM");
  fit->add_option("--data", cfg.data_path, "expression matrix TSV")->required();
  fit->add_option("--method", cfg.method, "LNN, LNNMV, LNNMV*, LNNGV, LN3, LN3MV*, or LN3GV")->required();
  add_pattern_flags(fit);
  fit->add_option("--tol", cfg.tol, "relative log-likelihood convergence tolerance");
  fit->add_option("--max-iter", cfg.max_iter, "EM iteration cap");
  add_common(fit);

  CLI::App* post = app.add_subcommand("posterior", "posterior pattern probabilities from a saved fit");
  post->add_option("--data", cfg.data_path, "expression matrix TSV")->required();
  post->add_option("--fit", cfg.fit_path, "fit.txt written by the fit subcommand")->required();
  add_pattern_flags(post);
  post->add_option("--Q", cfg.gv_quantiles, "variance-prior quantile count for GV methods")->check(CLI::PositiveNumber);
  add_common(post);

  CLI::App* diag = app.add_subcommand("diagnose", "gene-effect covariance evidence table");
  diag->add_option("--data", cfg.data_path, "expression matrix TSV")->required();
  diag->add_option("--bins", cfg.bins, "p-value histogram bins")->check(CLI::PositiveNumber);
  add_common(diag);

  CLI::App* sim = app.add_subcommand("simulate", "generate data with known truth");
  sim->add_option("--config", cfg.config_path, "simulation spec (key = value lines)")->required();
  sim->add_option("--seed", cfg.seed, "override the config seed");
  add_common(sim);

  CLI::App* score = app.add_subcommand("score", "calibration, ROC and top-K overlap against a truth table");
  score->add_option("--truth", cfg.truth_path, "truth TSV from simulate")->required();
  score->add_option("--posteriors", cfg.posterior_paths, "posterior tables to score")->required()->expected(-1);
  score->add_option("--K", cfg.top_k, "top list size for the overlap matrix")->check(CLI::PositiveNumber);
  score->add_option("--bins", cfg.bins, "calibration bins");
  score->add_option("--null-pattern", cfg.null_pattern, "1-based index of the null pattern in the truth");
  add_common(score);

  CLI11_PARSE(app, argc, argv);

  cfg.subcommand = app.get_subcommands().front()->get_name();
  return lnmix::run(cfg);
}
