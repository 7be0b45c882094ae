#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "softmix/bench.hpp"
#include "softmix/em.hpp"
#include "softmix/hermite.hpp"
#include "softmix/model.hpp"
#include "softmix/mom.hpp"
#include "softmix/subspace.hpp"

namespace softmix {

// Shortest decimal string that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

// features.csv: header x1..xL, one row per support point.
void write_features_csv(const std::string& path, const FeatureMatrix& x);
FeatureMatrix read_features_csv(const std::string& path);

// counts.csv: header index,count,freq. count is the integer draw count
// (all zeros marks the population limit); freq round-trips bit-exactly.
void write_counts_csv(const std::string& path, const SampleCounts& counts);
SampleCounts read_counts_csv(const std::string& path);

// Parameter file: header format_version,K,L; an alpha row; K theta rows.
void write_params_csv(const std::string& path, const MixtureParams& omega);
MixtureParams read_params_csv(const std::string& path);

// trace.csv: header iter,loglik; one row per tracked iteration.
void write_trace_csv(const std::string& path, const EmResult& result);

// moments.csv: one "m" row, then one "mixed" row per completing axis.
void write_moments_csv(const std::string& path, const LatentMoments& moments);

// subspace.csv: one "eigvals" row, then the rows of V hat tagged "v".
void write_subspace_csv(const std::string& path, const SubspaceEstimate& estimate);

// diag.csv: single fit diagnostics row.
void write_diag_csv(const std::string& path, const std::string& status,
                    const MomDiagnostics& diag);

// results.csv in canonical record order; wall_ms is written as 0 unless
// with_timing is set, so default output is byte-stable across runs.
void write_results_csv(std::ostream& out, const std::vector<BenchRecord>& records,
                       bool with_timing);
void write_results_csv(const std::string& path, const std::vector<BenchRecord>& records,
                       bool with_timing);

}  // namespace softmix
