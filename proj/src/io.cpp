#include "lnmix/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace lnmix {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double* out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  if (t == "inf" || t == "+inf") {
    *out = std::numeric_limits<double>::infinity();
    return true;
  }
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return false;
  *out = v;
  return true;
}

bool parse_long(const std::string& s, long long* out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size()) return false;
  *out = v;
  return true;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream create_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ExpressionMatrix parse_matrix(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(source_name + ": empty file");
  strip_cr(line);
  const std::vector<std::string> header = split_tabs(line);
  if (header.size() < 3 || header[0] != "gene_id")
    throw std::runtime_error(source_name + ": header must be 'gene_id' followed by at least two unit columns");

  std::vector<std::string> unit_names(header.begin() + 1, header.end());
  std::vector<std::string> cond_labels;
  for (const std::string& name : unit_names) {
    const size_t pos = name.rfind(':');
    if (pos == std::string::npos || pos == 0)
      throw std::runtime_error(source_name + ": unit column '" + name + "' is not of the form <condition>:<replicate>");
    cond_labels.push_back(name.substr(0, pos));
  }

  ExpressionMatrix data;
  data.design = ConditionDesign::from_unit_labels(cond_labels, unit_names);
  const size_t ni = unit_names.size();

  std::unordered_set<std::string> seen;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != ni + 1)
      throw std::runtime_error(source_name + " line " + std::to_string(line_no) + ": expected " +
                               std::to_string(ni + 1) + " fields, got " + std::to_string(fields.size()));
    if (!seen.insert(fields[0]).second)
      throw std::runtime_error(source_name + " line " + std::to_string(line_no) + ": duplicate gene id '" +
                               fields[0] + "'");
    data.gene_ids.push_back(fields[0]);
    for (size_t i = 0; i < ni; ++i) {
      double v = 0.0;
      if (!parse_double(fields[i + 1], &v) || !std::isfinite(v))
        throw std::runtime_error(source_name + " line " + std::to_string(line_no) + ", column " +
                                 std::to_string(i + 2) + " (unit " + unit_names[i] + "): non-numeric value '" +
                                 fields[i + 1] + "'");
      data.values.push_back(v);
    }
  }
  if (data.gene_ids.empty()) throw std::runtime_error(source_name + ": no data rows");
  return data;
}

ExpressionMatrix ingest(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return parse_matrix(in, path);
}

void write_matrix(const ExpressionMatrix& data, const std::string& path) {
  std::ofstream out = create_or_throw(path);
  out << "gene_id";
  for (int i = 0; i < data.n_units(); ++i) {
    const std::string name = data.design.unit_names.empty()
                                 ? data.design.condition_names[data.design.unit_condition[i]] + ":" + std::to_string(i + 1)
                                 : data.design.unit_names[i];
    out << '\t' << name;
  }
  out << '\n';
  for (int j = 0; j < data.n_genes(); ++j) {
    out << data.gene_ids[j];
    for (int i = 0; i < data.n_units(); ++i) out << '\t' << format_double(data.at(j, i));
    out << '\n';
  }
}

void write_posterior_table(const PosteriorTable& table, const std::string& path) {
  std::ofstream out = create_or_throw(path);
  out << "gene_id";
  for (int p = 1; p <= table.n_patterns; ++p) out << "\tpp_" << p;
  if (table.eppee) out << "\teppee";
  out << '\n';
  for (int j = 0; j < table.n_genes(); ++j) {
    out << table.gene_ids[j];
    for (int p = 0; p < table.n_patterns; ++p) out << '\t' << format_double(table.prob(j, p));
    if (table.eppee) out << '\t' << format_double((*table.eppee)[j]);
    out << '\n';
  }
}

PosteriorTable read_posterior_table(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  strip_cr(line);
  const std::vector<std::string> header = split_tabs(line);
  if (header.size() < 2 || header[0] != "gene_id")
    throw std::runtime_error(path + ": not a posterior table (header must start with gene_id)");
  const bool has_eppee = header.back() == "eppee";
  const int np = static_cast<int>(header.size()) - 1 - (has_eppee ? 1 : 0);
  if (np < 1) throw std::runtime_error(path + ": no pattern probability columns");

  PosteriorTable table;
  table.n_patterns = np;
  if (has_eppee) table.eppee = std::vector<double>{};
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != header.size())
      throw std::runtime_error(path + " line " + std::to_string(line_no) + ": wrong field count");
    table.gene_ids.push_back(fields[0]);
    for (int p = 0; p < np; ++p) {
      double v = 0.0;
      if (!parse_double(fields[p + 1], &v))
        throw std::runtime_error(path + " line " + std::to_string(line_no) + ": bad probability");
      table.probs.push_back(v);
    }
    if (has_eppee) {
      double v = 0.0;
      if (!parse_double(fields.back(), &v))
        throw std::runtime_error(path + " line " + std::to_string(line_no) + ": bad eppee");
      table.eppee->push_back(v);
    }
  }
  return table;
}

void write_eppee_cdf(const PosteriorTable& table, const std::string& path) {
  std::ofstream out = create_or_throw(path);
  out << "eppee\tfraction_le\n";
  for (const auto& [value, frac] : eppee_cdf(table)) out << format_double(value) << '\t' << format_double(frac) << '\n';
}

void write_fit(const FitResult& fit, const std::string& path) {
  std::ofstream out = create_or_throw(path);
  const Model model = fit.theta.model;
  out << "method = " << method_name(fit.method) << '\n';
  out << "model = " << model_name(model) << '\n';
  out << "patterns = " << fit.pi.size() << '\n';
  out << "mu = " << format_double(fit.theta.mu) << '\n';
  out << "sigma_tau2 = " << format_double(fit.theta.tau_var) << '\n';
  if (model_has_gene_effect(model)) out << "sigma_gamma2 = " << format_double(fit.theta.gamma_var) << '\n';
  if (!model_gene_specific_error(model)) out << "sigma2 = " << format_double(fit.theta.error_var) << '\n';
  if (model_gene_specific_error(model)) {
    out << "nu = " << format_double(fit.theta.prior.nu) << '\n';
    out << "phi = " << format_double(fit.theta.prior.phi) << '\n';
  }
  out << "loglik = " << format_double(fit.loglik) << '\n';
  out << "iterations = " << fit.iterations << '\n';
  out << "converged = " << (fit.converged ? 1 : 0) << '\n';
  out << "clamped = " << (fit.variance_clamped ? 1 : 0) << '\n';
  for (size_t p = 0; p < fit.pi.size(); ++p) out << "pi_" << (p + 1) << " = " << format_double(fit.pi[p]) << '\n';
}

namespace {

std::unordered_map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::unordered_map<std::string, std::string> kv;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + " line " + std::to_string(line_no) + ": expected key = value");
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

std::string require_key(const std::unordered_map<std::string, std::string>& kv, const std::string& key,
                        const std::string& path) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error(path + ": missing key '" + key + "'");
  return it->second;
}

double require_double(const std::unordered_map<std::string, std::string>& kv, const std::string& key,
                      const std::string& path) {
  double v = 0.0;
  if (!parse_double(require_key(kv, key, path), &v)) throw std::runtime_error(path + ": bad number for '" + key + "'");
  return v;
}

}  // namespace

FitResult read_fit(const std::string& path) {
  const auto kv = read_key_values(path);
  FitResult fit;
  fit.method = parse_method(require_key(kv, "method", path));
  fit.theta.model = model_of(fit.method);
  fit.theta.mu = require_double(kv, "mu", path);
  fit.theta.tau_var = require_double(kv, "sigma_tau2", path);
  if (model_has_gene_effect(fit.theta.model)) fit.theta.gamma_var = require_double(kv, "sigma_gamma2", path);
  if (!model_gene_specific_error(fit.theta.model)) fit.theta.error_var = require_double(kv, "sigma2", path);
  if (model_gene_specific_error(fit.theta.model)) {
    fit.theta.prior.nu = require_double(kv, "nu", path);
    fit.theta.prior.phi = require_double(kv, "phi", path);
    fit.theta.prior.common_variance = std::isinf(fit.theta.prior.nu);
  }
  fit.loglik = require_double(kv, "loglik", path);
  long long iters = 0;
  parse_long(require_key(kv, "iterations", path), &iters);
  fit.iterations = static_cast<int>(iters);
  fit.converged = require_key(kv, "converged", path) == "1";
  long long np = 0;
  if (!parse_long(require_key(kv, "patterns", path), &np) || np < 1)
    throw std::runtime_error(path + ": bad pattern count");
  fit.pi.resize(np);
  for (long long p = 1; p <= np; ++p) fit.pi[p - 1] = require_double(kv, "pi_" + std::to_string(p), path);
  return fit;
}

void write_trace(const FitResult& fit, const std::string& path) {
  std::ofstream out = create_or_throw(path);
  out << "iteration\tloglik\n";
  for (size_t i = 0; i < fit.trace.size(); ++i) out << i << '\t' << format_double(fit.trace[i]) << '\n';
}

void write_truth(const TruthTable& truth, const std::vector<std::string>& gene_ids, const std::string& path) {
  std::ofstream out = create_or_throw(path);
  const bool mv = !truth.sigma_j2.empty();
  out << "gene_id\tpattern";
  if (mv) out << "\tsigma_j2";
  out << '\n';
  for (size_t j = 0; j < truth.pattern.size(); ++j) {
    out << gene_ids[j] << '\t' << (truth.pattern[j] + 1);
    if (mv) out << '\t' << format_double(truth.sigma_j2[j]);
    out << '\n';
  }
}

TruthTable read_truth(const std::string& path, std::vector<std::string>* gene_ids) {
  std::ifstream in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  strip_cr(line);
  const std::vector<std::string> header = split_tabs(line);
  if (header.size() < 2 || header[0] != "gene_id" || header[1] != "pattern")
    throw std::runtime_error(path + ": not a truth table");
  const bool mv = header.size() > 2 && header[2] == "sigma_j2";

  TruthTable truth;
  truth.null_pattern = 0;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != header.size())
      throw std::runtime_error(path + " line " + std::to_string(line_no) + ": wrong field count");
    if (gene_ids) gene_ids->push_back(fields[0]);
    long long p = 0;
    if (!parse_long(fields[1], &p) || p < 1)
      throw std::runtime_error(path + " line " + std::to_string(line_no) + ": bad pattern index");
    truth.pattern.push_back(static_cast<int>(p - 1));
    if (mv) {
      double v = 0.0;
      if (!parse_double(fields[2], &v))
        throw std::runtime_error(path + " line " + std::to_string(line_no) + ": bad sigma_j2");
      truth.sigma_j2.push_back(v);
    }
  }
  return truth;
}

void write_evidence(const std::vector<CovarianceEvidence>& rows, const std::string& path) {
  std::ofstream out = create_or_throw(path);
  out << "pair\tpi_ee_hat\tsigma_tau_bar\tpredicted_cov\tobserved_cov\n";
  for (const auto& r : rows) {
    out << r.pair << '\t' << format_double(r.pi_ee_hat) << '\t' << format_double(r.sigma_tau_bar) << '\t'
        << format_double(r.predicted_cov) << '\t' << format_double(r.observed_cov) << '\n';
  }
}

SimSpec read_sim_spec(const std::string& path) {
  const auto kv = read_key_values(path);
  SimSpec spec;
  spec.model = parse_model(require_key(kv, "model", path));

  long long genes = 0;
  if (!parse_long(require_key(kv, "genes", path), &genes) || genes < 1)
    throw std::runtime_error(path + ": bad gene count");
  spec.genes = static_cast<int>(genes);

  if (auto it = kv.find("seed"); it != kv.end()) {
    long long seed = 0;
    if (!parse_long(it->second, &seed) || seed < 0) throw std::runtime_error(path + ": bad seed");
    spec.seed = static_cast<uint64_t>(seed);
  }

  // design = cond:replicates, comma separated
  {
    const std::string desc = require_key(kv, "design", path);
    std::vector<std::string> labels;
    std::stringstream ss(desc);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const size_t pos = item.rfind(':');
      long long reps = 0;
      if (pos == std::string::npos || pos == 0 || !parse_long(item.substr(pos + 1), &reps) || reps < 1)
        throw std::runtime_error(path + ": bad design entry '" + item + "' (expected condition:replicates)");
      const std::string cond = trim(item.substr(0, pos));
      for (long long r = 0; r < reps; ++r) labels.push_back(cond);
    }
    spec.design = ConditionDesign::from_unit_labels(labels);
  }

  // patterns = all | vs-control:<name> | file:<path>
  {
    const std::string desc = require_key(kv, "patterns", path);
    if (desc == "all") {
      spec.patterns = all_partition_patterns(spec.design);
    } else if (desc.rfind("vs-control:", 0) == 0) {
      spec.patterns = vs_control_patterns(spec.design, trim(desc.substr(11)));
    } else if (desc.rfind("file:", 0) == 0) {
      spec.patterns = patterns_from_file(spec.design, trim(desc.substr(5)));
    } else {
      throw std::runtime_error(path + ": bad patterns spec '" + desc + "'");
    }
  }

  // pi = uniform | null:<x> | comma list of P values
  {
    const std::string desc = require_key(kv, "pi", path);
    const int np = spec.patterns.size();
    if (desc == "uniform") {
      spec.pi.assign(np, 1.0 / np);
    } else if (desc.rfind("null:", 0) == 0) {
      double x = 0.0;
      if (!parse_double(desc.substr(5), &x) || x < 0.0 || x > 1.0)
        throw std::runtime_error(path + ": bad null proportion");
      const auto idx = spec.patterns.null_index();
      if (!idx) throw std::runtime_error(path + ": pi = null:... needs a single-group pattern in the set");
      if (np == 1 && x != 1.0) throw std::runtime_error(path + ": single pattern must have pi = 1");
      spec.pi.assign(np, np > 1 ? (1.0 - x) / (np - 1) : 1.0);
      spec.pi[*idx] = x;
    } else {
      std::stringstream ss(desc);
      std::string item;
      while (std::getline(ss, item, ',')) {
        double v = 0.0;
        if (!parse_double(item, &v)) throw std::runtime_error(path + ": bad pi entry '" + item + "'");
        spec.pi.push_back(v);
      }
      if (static_cast<int>(spec.pi.size()) != np)
        throw std::runtime_error(path + ": pi needs " + std::to_string(np) + " entries");
    }
  }

  spec.mu = require_double(kv, "mu", path);
  spec.tau_var = require_double(kv, "sigma_tau2", path);
  if (model_has_gene_effect(spec.model)) spec.gamma_var = require_double(kv, "sigma_gamma2", path);
  if (model_gene_specific_error(spec.model)) {
    spec.nu = require_double(kv, "nu", path);
    spec.phi = require_double(kv, "phi", path);
  } else {
    spec.error_var = require_double(kv, "sigma2", path);
  }
  spec.validate();
  return spec;
}

}  // namespace lnmix
