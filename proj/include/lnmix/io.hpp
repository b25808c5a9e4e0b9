#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lnmix/data.hpp"
#include "lnmix/diagnostics.hpp"
#include "lnmix/em.hpp"
#include "lnmix/posterior.hpp"
#include "lnmix/simulate.hpp"

namespace lnmix {

// Expression matrix TSV: header `gene_id` then one column per unit named
// `<condition>:<replicate>`; body rows carry the gene id and I numeric
// values. Malformed input is rejected with the offending line/column.
ExpressionMatrix ingest(const std::string& path);
ExpressionMatrix parse_matrix(std::istream& in, const std::string& source_name);

// Values serialized with 17 significant digits so write/ingest round-trips
// are bit exact.
void write_matrix(const ExpressionMatrix& data, const std::string& path);

void write_posterior_table(const PosteriorTable& table, const std::string& path);
// Reads gene ids, per-pattern probabilities and the eppee column back.
PosteriorTable read_posterior_table(const std::string& path);

void write_eppee_cdf(const PosteriorTable& table, const std::string& path);

void write_fit(const FitResult& fit, const std::string& path);
FitResult read_fit(const std::string& path);

void write_trace(const FitResult& fit, const std::string& path);

void write_truth(const TruthTable& truth, const std::vector<std::string>& gene_ids, const std::string& path);
TruthTable read_truth(const std::string& path, std::vector<std::string>* gene_ids = nullptr);

void write_evidence(const std::vector<CovarianceEvidence>& rows, const std::string& path);

// Simulation spec from key = value lines; see README for the keys.
SimSpec read_sim_spec(const std::string& path);

std::string format_double(double v);  // shortest exact round-trip text

}  // namespace lnmix
