#include "lnmix/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "lnmix/io.hpp"

namespace lnmix {

namespace {

struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what) : std::runtime_error(stage + ": " + what) {}
};

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

PatternSet resolve_patterns(const RunConfig& cfg, const ConditionDesign& design) {
  const int sources = (cfg.pattern_file.empty() ? 0 : 1) + (cfg.all_partitions ? 1 : 0) + (cfg.vs_control.empty() ? 0 : 1);
  if (sources != 1)
    throw std::invalid_argument("exactly one of --patterns, --all-partitions, --vs-control is required");
  if (!cfg.pattern_file.empty()) return patterns_from_file(design, cfg.pattern_file);
  if (cfg.all_partitions) return all_partition_patterns(design);
  return vs_control_patterns(design, cfg.vs_control);
}

std::string label_of(const std::string& path) {
  std::string name = std::filesystem::path(path).filename().string();
  const size_t dot = name.rfind('.');
  if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);
  return name;
}

void warn_single_replicates(const ExpressionMatrix& data) {
  const auto sizes = data.design.condition_sizes();
  for (size_t c = 0; c < sizes.size(); ++c) {
    if (sizes[c] < 2)
      std::cerr << "warning: condition " << data.design.condition_names[c]
                << " has a single replicate and contributes no degrees of freedom to the variance prior\n";
  }
}

EMConfig em_config(const RunConfig& cfg) {
  EMConfig em;
  em.tol = cfg.tol;
  em.max_iter = cfg.max_iter;
  em.threads = cfg.threads;
  em.gv_quantiles = cfg.gv_quantiles;
  return em;
}

std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  return std::filesystem::path(cfg.out_dir) / name;
}

void run_fit(const RunConfig& cfg) {
  const ExpressionMatrix data = stage("ingest", [&] { return ingest(cfg.data_path); });
  const Method method = stage("fit", [&] { return parse_method(cfg.method); });
  const PatternSet patterns = stage("patterns", [&] { return resolve_patterns(cfg, data.design); });
  if (model_gene_specific_error(model_of(method))) warn_single_replicates(data);
  const FitResult result = stage("fit", [&] { return fit(data, patterns, method, em_config(cfg)); });
  stage("write", [&] {
    write_fit(result, out_path(cfg, "fit.txt").string());
    write_trace(result, out_path(cfg, "loglik_trace.tsv").string());
    return 0;
  });
}

void run_posterior(const RunConfig& cfg) {
  const ExpressionMatrix data = stage("ingest", [&] { return ingest(cfg.data_path); });
  FitResult fit = stage("read-fit", [&] { return read_fit(cfg.fit_path); });
  const PatternSet patterns = stage("patterns", [&] { return resolve_patterns(cfg, data.design); });
  if (static_cast<int>(fit.pi.size()) != patterns.size())
    throw StageError("patterns", "fit has " + std::to_string(fit.pi.size()) + " patterns but " +
                                     std::to_string(patterns.size()) + " were resolved");
  // gene-specific variances are not stored in fit.txt; they are a pure
  // function of the data and the recorded prior
  if (model_gene_specific_error(fit.theta.model)) {
    stage("shrink", [&] {
      const SampleVariances sv = SampleVariances::from(data);
      fit.theta.gene_error_var =
          shrink(sv, fit.theta.prior, shrink_rule_of(fit.method), data.n_units(), data.design.n_conditions());
      return 0;
    });
  }
  const PosteriorTable table =
      stage("posterior", [&] { return posteriors(data, patterns, fit, fit.method, em_config(cfg)); });
  stage("write", [&] {
    write_posterior_table(table, out_path(cfg, "posteriors.tsv").string());
    write_eppee_cdf(table, out_path(cfg, "eppee_cdf.tsv").string());
    return 0;
  });
}

void run_diagnose(const RunConfig& cfg) {
  const ExpressionMatrix data = stage("ingest", [&] { return ingest(cfg.data_path); });
  const auto rows = stage("diagnose", [&] { return evidence_table(data, cfg.bins); });
  stage("write", [&] {
    write_evidence(rows, out_path(cfg, "evidence.tsv").string());
    return 0;
  });
}

void run_simulate(const RunConfig& cfg) {
  SimSpec spec = stage("config", [&] { return read_sim_spec(cfg.config_path); });
  if (cfg.seed >= 0) spec.seed = static_cast<uint64_t>(cfg.seed);
  const auto [data, truth] = stage("simulate", [&] { return generate(spec, cfg.threads); });
  stage("write", [&] {
    write_matrix(data, out_path(cfg, "data.tsv").string());
    write_truth(truth, data.gene_ids, out_path(cfg, "truth.tsv").string());
    return 0;
  });
}

void run_score(const RunConfig& cfg) {
  if (cfg.posterior_paths.empty()) throw StageError("score", "need at least one posterior table");
  std::vector<std::string> truth_ids;
  TruthTable truth = stage("read-truth", [&] { return read_truth(cfg.truth_path, &truth_ids); });
  truth.null_pattern = cfg.null_pattern - 1;

  std::vector<PosteriorTable> tables;
  for (const auto& path : cfg.posterior_paths) {
    PosteriorTable t = stage("read-posteriors", [&] { return read_posterior_table(path); });
    if (t.gene_ids != truth_ids) throw StageError("score", path + " covers a different gene universe than the truth");
    t.method_label = label_of(path);
    tables.push_back(std::move(t));
  }

  stage("score", [&] {
    for (const auto& t : tables) {
      const auto bins = calibration_score(t, truth, cfg.bins);
      std::ofstream out(out_path(cfg, "calibration_" + t.method_label + ".tsv"));
      if (!out) throw std::runtime_error("cannot write calibration table");
      out << "bin\tmean_eppee\tee_fraction\tcount\n";
      for (size_t b = 0; b < bins.size(); ++b)
        out << (b + 1) << '\t' << format_double(bins[b].mean_eppee) << '\t' << format_double(bins[b].ee_fraction)
            << '\t' << bins[b].count << '\n';

      const auto roc = roc_points(t, truth);
      std::ofstream rout(out_path(cfg, "roc_" + t.method_label + ".tsv"));
      if (!rout) throw std::runtime_error("cannot write roc table");
      rout << "false_positives\ttrue_positives\n";
      for (const auto& [fp, tp] : roc) rout << fp << '\t' << tp << '\n';
    }
    if (tables.size() >= 2) {
      const auto overlap = topk_overlap(tables, cfg.top_k);
      std::ofstream out(out_path(cfg, "overlap.tsv"));
      if (!out) throw std::runtime_error("cannot write overlap matrix");
      out << "method";
      for (const auto& t : tables) out << '\t' << t.method_label;
      out << '\n';
      for (size_t a = 0; a < tables.size(); ++a) {
        out << tables[a].method_label;
        for (size_t b = 0; b < tables.size(); ++b) out << '\t' << overlap[a][b];
        out << '\n';
      }
    }
    return 0;
  });
}

}  // namespace

int run(const RunConfig& cfg) {
  try {
    if (cfg.out_dir.empty()) throw StageError("setup", "--out directory is required");
    std::filesystem::create_directories(cfg.out_dir);
    if (cfg.subcommand == "fit")
      run_fit(cfg);
    else if (cfg.subcommand == "posterior")
      run_posterior(cfg);
    else if (cfg.subcommand == "diagnose")
      run_diagnose(cfg);
    else if (cfg.subcommand == "simulate")
      run_simulate(cfg);
    else if (cfg.subcommand == "score")
      run_score(cfg);
    else
      throw StageError("setup", "unknown subcommand '" + cfg.subcommand + "'");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace lnmix
