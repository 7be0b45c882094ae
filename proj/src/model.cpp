#include "softmix/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "softmix/errors.hpp"

namespace softmix {

namespace {

constexpr double kSimplexTol = 1e-12;
constexpr double kLogFloor = 1e-300;

double logsumexp(const VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf stays -inf
  return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

void FeatureMatrix::validate() const {
  if (rows.rows() < 2) throw InvalidInputError("FeatureMatrix: need at least 2 support points");
  if (rows.cols() < 1) throw InvalidInputError("FeatureMatrix: dimension must be >= 1");
  if (!rows.allFinite()) throw InvalidInputError("FeatureMatrix: non-finite entry");
}

void MixtureParams::validate() const {
  if (alpha.size() < 1) throw InvalidInputError("MixtureParams: K must be >= 1");
  if (thetas.rows() != alpha.size())
    throw InvalidInputError("MixtureParams: alpha length and theta row count differ");
  if (!thetas.allFinite()) throw InvalidInputError("MixtureParams: non-finite theta entry");
  if (!alpha.allFinite() || alpha.minCoeff() < 0.0)
    throw InvalidInputError("MixtureParams: weights must be nonnegative");
  if (std::abs(alpha.sum() - 1.0) > kSimplexTol)
    throw InvalidInputError("MixtureParams: weights must sum to 1");
}

void SampleCounts::validate() const {
  if (freq.size() < 1) throw InvalidInputError("SampleCounts: empty frequency vector");
  if (!freq.allFinite() || freq.minCoeff() < 0.0)
    throw InvalidInputError("SampleCounts: frequencies must be nonnegative");
  if (std::abs(freq.sum() - 1.0) > kSimplexTol)
    throw InvalidInputError("SampleCounts: frequencies must sum to 1");
  if (!population && n_samples < 1)
    throw InvalidInputError("SampleCounts: sampled data needs n_samples >= 1");
}

VectorXd log_softmax_component(const FeatureMatrix& x, const VectorXd& theta) {
  if (!theta.allFinite()) throw InvalidInputError("softmax_component: non-finite theta");
  if (theta.size() != x.dim())
    throw InvalidInputError("softmax_component: theta dimension mismatch");
  VectorXd s = x.rows * theta;
  const double lse = logsumexp(s);
  return s.array() - lse;
}

VectorXd softmax_component(const FeatureMatrix& x, const VectorXd& theta) {
  return log_softmax_component(x, theta).array().exp();
}

namespace {

// log alpha_k + log A(x_j; theta_k) for all k, j. Shared by the mixture
// pmf, the likelihood and the responsibilities.
MatrixXd log_weighted_components(const FeatureMatrix& x, const MixtureParams& omega) {
  omega.validate();
  if (omega.dim() != x.dim())
    throw InvalidInputError("mixture: parameter dimension does not match features");
  MatrixXd log_wa(omega.k(), x.p());
  for (Eigen::Index k = 0; k < omega.k(); ++k) {
    const double log_alpha = std::log(std::max(omega.alpha[k], kLogFloor));
    log_wa.row(k) = log_softmax_component(x, omega.thetas.row(k).transpose()).transpose().array() + log_alpha;
  }
  return log_wa;
}

VectorXd column_logsumexp(const MatrixXd& m) {
  VectorXd out(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out[j] = logsumexp(m.col(j));
  return out;
}

}  // namespace

VectorXd log_mixture_pmf(const FeatureMatrix& x, const MixtureParams& omega) {
  return column_logsumexp(log_weighted_components(x, omega));
}

VectorXd mixture_pmf(const FeatureMatrix& x, const MixtureParams& omega) {
  return log_mixture_pmf(x, omega).array().exp();
}

SampleCounts sample(const FeatureMatrix& x, const MixtureParams& omega,
                    std::int64_t n, RngStream rng) {
  if (n < 1) throw InvalidInputError("sample: need n >= 1");
  const VectorXd pmf = mixture_pmf(x, omega);
  VectorXd cum(pmf.size());
  double acc = 0.0;
  for (Eigen::Index j = 0; j < pmf.size(); ++j) {
    acc += pmf[j];
    cum[j] = acc;
  }
  cum[pmf.size() - 1] = 1.0;  // close the tail against rounding

  VectorXd counts = VectorXd::Zero(pmf.size());
  for (std::int64_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const double* begin = cum.data();
    const double* it = std::upper_bound(begin, begin + cum.size(), u);
    counts[static_cast<Eigen::Index>(it - begin)] += 1.0;
  }
  SampleCounts out;
  out.freq = counts / static_cast<double>(n);
  out.n_samples = n;
  out.population = false;
  return out;
}

double log_likelihood(const SampleCounts& counts, const FeatureMatrix& x,
                      const MixtureParams& omega) {
  counts.validate();
  if (counts.freq.size() != x.p())
    throw InvalidInputError("log_likelihood: counts do not match support size");
  const VectorXd log_pi = log_mixture_pmf(x, omega);
  double ll = 0.0;
  for (Eigen::Index j = 0; j < log_pi.size(); ++j) {
    if (counts.freq[j] == 0.0) continue;
    if (!std::isfinite(log_pi[j]))
      throw NumericDegeneracyError("log_likelihood: zero mixture probability at observed point " +
                                   std::to_string(j));
    ll += counts.freq[j] * log_pi[j];
  }
  if (!std::isfinite(ll)) throw NumericDegeneracyError("log_likelihood: non-finite value");
  return ll;
}

MatrixXd responsibilities(const FeatureMatrix& x, const MixtureParams& omega) {
  const MatrixXd log_wa = log_weighted_components(x, omega);
  const VectorXd log_pi = column_logsumexp(log_wa);
  if (!log_pi.allFinite())
    throw NumericDegeneracyError("responsibilities: a support point has no mass under any component");
  return (log_wa.rowwise() - log_pi.transpose()).array().exp();
}

double param_distance(const MixtureParams& omega, const MixtureParams& omega_ref,
                      double scale_theta, double scale_alpha) {
  if (omega.k() != omega_ref.k() || omega.dim() != omega_ref.dim())
    throw InvalidInputError("param_distance: shape mismatch");
  if (!(scale_theta > 0.0) || !(scale_alpha > 0.0))
    throw InvalidInputError("param_distance: scales must be positive");
  const double theta_part =
      scale_theta * (omega.thetas - omega_ref.thetas).rowwise().norm().maxCoeff();
  const double alpha_part =
      (omega.alpha - omega_ref.alpha).lpNorm<Eigen::Infinity>() / scale_alpha;
  return std::max(theta_part, alpha_part);
}

double param_distance(const MixtureParams& omega, const MixtureParams& omega_ref) {
  return param_distance(omega, omega_ref, 1.0, omega_ref.alpha.minCoeff());
}

}  // namespace softmix
