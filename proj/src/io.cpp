#include "softmix/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "softmix/errors.hpp"

namespace softmix {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::int64_t parse_int(const std::string& text, const std::string& where) {
  std::int64_t value = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size())
    throw IoError("bad integer '" + text + "' in " + where);
  return value;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), value);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size())
    throw IoError("bad number '" + text + "'");
  return value;
}

void write_features_csv(const std::string& path, const FeatureMatrix& x) {
  x.validate();
  std::ofstream out = open_out(path);
  for (Eigen::Index c = 0; c < x.dim(); ++c)
    out << (c ? "," : "") << "x" << (c + 1);
  out << "\n";
  for (Eigen::Index j = 0; j < x.p(); ++j) {
    for (Eigen::Index c = 0; c < x.dim(); ++c)
      out << (c ? "," : "") << format_double(x.rows(j, c));
    out << "\n";
  }
}

FeatureMatrix read_features_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.size() < 2) throw IoError(path + ": missing header or rows");
  const std::size_t l = split_csv_line(lines[0]).size();
  FeatureMatrix x;
  x.rows.resize(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(l));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> fields = split_csv_line(lines[i]);
    if (fields.size() != l) throw IoError(path + ": ragged row " + std::to_string(i));
    for (std::size_t c = 0; c < l; ++c)
      x.rows(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(c)) =
          parse_double(fields[c]);
  }
  x.validate();
  return x;
}

void write_counts_csv(const std::string& path, const SampleCounts& counts) {
  counts.validate();
  std::ofstream out = open_out(path);
  out << "index,count,freq\n";
  for (Eigen::Index j = 0; j < counts.freq.size(); ++j) {
    const std::int64_t c = counts.population
                               ? 0
                               : std::llround(counts.freq[j] *
                                              static_cast<double>(counts.n_samples));
    out << j << "," << c << "," << format_double(counts.freq[j]) << "\n";
  }
}

SampleCounts read_counts_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines[0] != "index,count,freq")
    throw IoError(path + ": expected header index,count,freq");
  SampleCounts counts;
  counts.freq.resize(static_cast<Eigen::Index>(lines.size() - 1));
  std::int64_t total = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> fields = split_csv_line(lines[i]);
    if (fields.size() != 3) throw IoError(path + ": ragged row " + std::to_string(i));
    total += parse_int(fields[1], path);
    counts.freq[static_cast<Eigen::Index>(i - 1)] = parse_double(fields[2]);
  }
  counts.n_samples = total;
  counts.population = total == 0;
  counts.validate();
  return counts;
}

void write_params_csv(const std::string& path, const MixtureParams& omega) {
  omega.validate();
  std::ofstream out = open_out(path);
  out << "format_version,K,L\n";
  out << 1 << "," << omega.k() << "," << omega.dim() << "\n";
  out << "alpha";
  for (Eigen::Index i = 0; i < omega.k(); ++i) out << "," << format_double(omega.alpha[i]);
  out << "\n";
  for (Eigen::Index r = 0; r < omega.k(); ++r) {
    out << "theta";
    for (Eigen::Index c = 0; c < omega.dim(); ++c)
      out << "," << format_double(omega.thetas(r, c));
    out << "\n";
  }
}

MixtureParams read_params_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.size() < 3 || lines[0] != "format_version,K,L")
    throw IoError(path + ": expected header format_version,K,L");
  const std::vector<std::string> meta = split_csv_line(lines[1]);
  if (meta.size() != 3) throw IoError(path + ": bad metadata row");
  if (parse_int(meta[0], path) != 1) throw IoError(path + ": unsupported format version");
  const Eigen::Index k = parse_int(meta[1], path);
  const Eigen::Index l = parse_int(meta[2], path);
  if (lines.size() != static_cast<std::size_t>(3 + k))
    throw IoError(path + ": expected " + std::to_string(k) + " theta rows");

  MixtureParams omega;
  const std::vector<std::string> alpha_row = split_csv_line(lines[2]);
  if (alpha_row.size() != static_cast<std::size_t>(k + 1) || alpha_row[0] != "alpha")
    throw IoError(path + ": bad alpha row");
  omega.alpha.resize(k);
  for (Eigen::Index i = 0; i < k; ++i)
    omega.alpha[i] = parse_double(alpha_row[static_cast<std::size_t>(i + 1)]);

  omega.thetas.resize(k, l);
  for (Eigen::Index r = 0; r < k; ++r) {
    const std::vector<std::string> row = split_csv_line(lines[static_cast<std::size_t>(3 + r)]);
    if (row.size() != static_cast<std::size_t>(l + 1) || row[0] != "theta")
      throw IoError(path + ": bad theta row " + std::to_string(r));
    for (Eigen::Index c = 0; c < l; ++c)
      omega.thetas(r, c) = parse_double(row[static_cast<std::size_t>(c + 1)]);
  }
  omega.validate();
  return omega;
}

void write_trace_csv(const std::string& path, const EmResult& result) {
  std::ofstream out = open_out(path);
  out << "iter,loglik\n";
  if (result.loglik_trace.empty()) {
    out << result.iters_used << "," << format_double(result.final_loglik) << "\n";
    return;
  }
  for (std::size_t i = 0; i < result.loglik_trace.size(); ++i)
    out << i << "," << format_double(result.loglik_trace[i]) << "\n";
}

void write_moments_csv(const std::string& path, const LatentMoments& moments) {
  std::ofstream out = open_out(path);
  out << "m";
  for (Eigen::Index i = 0; i < moments.m.size(); ++i)
    out << "," << format_double(moments.m[i]);
  out << "\n";
  for (Eigen::Index r = 0; r < moments.mixed.rows(); ++r) {
    out << "mixed";
    for (Eigen::Index c = 0; c < moments.mixed.cols(); ++c)
      out << "," << format_double(moments.mixed(r, c));
    out << "\n";
  }
}

void write_subspace_csv(const std::string& path, const SubspaceEstimate& estimate) {
  std::ofstream out = open_out(path);
  out << "eigvals";
  for (Eigen::Index i = 0; i < estimate.eigvals.size(); ++i)
    out << "," << format_double(estimate.eigvals[i]);
  out << "\n";
  for (Eigen::Index r = 0; r < estimate.v_hat.rows(); ++r) {
    out << "v";
    for (Eigen::Index c = 0; c < estimate.v_hat.cols(); ++c)
      out << "," << format_double(estimate.v_hat(r, c));
    out << "\n";
  }
}

void write_diag_csv(const std::string& path, const std::string& status,
                    const MomDiagnostics& diag) {
  std::ofstream out = open_out(path);
  out << "status,projection_iters,min_hankel_eig,vandermonde_cond\n";
  out << status << "," << diag.projection_iters << ","
      << format_double(diag.min_hankel_eig) << ","
      << format_double(diag.vandermonde_cond) << "\n";
}

void write_results_csv(std::ostream& out, const std::vector<BenchRecord>& records,
                       bool with_timing) {
  out << "scenario_id,K,L,p,N,seed,method,replicate,err_theta,err_alpha,iters,wall_ms,status\n";
  for (const BenchRecord& r : records) {
    out << r.scenario_id << "," << r.k << "," << r.l << "," << r.p << "," << r.n << ","
        << r.seed << "," << r.method << "," << r.replicate << ","
        << format_double(r.err_theta) << "," << format_double(r.err_alpha) << ","
        << r.iters << "," << format_double(with_timing ? r.wall_ms : 0.0) << ","
        << r.status << "\n";
  }
}

void write_results_csv(const std::string& path, const std::vector<BenchRecord>& records,
                       bool with_timing) {
  std::ofstream out = open_out(path);
  write_results_csv(out, records, with_timing);
}

}  // namespace softmix
