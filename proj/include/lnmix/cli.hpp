#pragma once

#include <string>
#include <vector>

namespace lnmix {

// One batch invocation. Which fields matter depends on the subcommand;
// run() validates and reports the offending stage on failure.
struct RunConfig {
  std::string subcommand;  // fit | posterior | diagnose | simulate | score

  std::string data_path;
  std::string fit_path;
  std::string config_path;
  std::string truth_path;
  std::vector<std::string> posterior_paths;

  std::string method;

  // exactly one pattern source for fit/posterior
  std::string pattern_file;
  bool all_partitions = false;
  std::string vs_control;

  int gv_quantiles = 1000;
  double tol = 1e-8;
  int max_iter = 500;
  int threads = 1;
  int bins = 20;
  int top_k = 200;
  int null_pattern = 1;   // 1-based, for score
  double threshold = 0.1; // reserved for gene-list style reports
  long long seed = -1;    // >= 0 overrides the simulation config seed

  std::string out_dir;
};

// Executes the configured subcommand, writing artifacts under out_dir.
// Returns 0 on success; on failure prints one line naming the stage to
// stderr and returns nonzero.
int run(const RunConfig& config);

}  // namespace lnmix
