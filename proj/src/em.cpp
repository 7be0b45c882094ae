#include "softmix/em.hpp"

#include <cmath>
#include <string>

#include "softmix/errors.hpp"

namespace softmix {

namespace {

constexpr double kLogFloor = 1e-300;

void check_pair(const SampleCounts& counts, const FeatureMatrix& x,
                const MixtureParams& omega) {
  counts.validate();
  omega.validate();
  if (counts.freq.size() != x.p())
    throw InvalidInputError("em: counts do not match support size");
  if (omega.dim() != x.dim())
    throw InvalidInputError("em: parameter dimension does not match features");
}

}  // namespace

void EmConfig::validate() const {
  if (!(step_size > 0.0)) throw InvalidInputError("EmConfig: step_size must be positive");
  if (!(rel_tol > 0.0)) throw InvalidInputError("EmConfig: rel_tol must be positive");
  if (max_iters < 1) throw InvalidInputError("EmConfig: max_iters must be >= 1");
}

double q_function(const SampleCounts& counts, const FeatureMatrix& x,
                  const MixtureParams& omega, const MixtureParams& omega_prev) {
  check_pair(counts, x, omega);
  omega_prev.validate();
  if (omega_prev.k() != omega.k() || omega_prev.dim() != omega.dim())
    throw InvalidInputError("q_function: parameter shapes differ");

  const MatrixXd resp = responsibilities(x, omega_prev);  // K x p
  double q = 0.0;
  for (Eigen::Index k = 0; k < omega.k(); ++k) {
    const double mass = resp.row(k).transpose().dot(counts.freq);
    if (mass == 0.0) continue;
    if (omega.alpha[k] <= 0.0)
      throw NumericDegeneracyError("q_function: zero weight with responsibility mass on component " +
                                   std::to_string(k));
    const VectorXd log_a = log_softmax_component(x, omega.thetas.row(k).transpose());
    const double log_alpha = std::log(std::max(omega.alpha[k], kLogFloor));
    q += (counts.freq.array() * resp.row(k).transpose().array() *
          (log_a.array() + log_alpha))
             .sum();
  }
  if (!std::isfinite(q)) throw NumericDegeneracyError("q_function: non-finite value");
  return q;
}

VectorXd update_alpha(const SampleCounts& counts, const FeatureMatrix& x,
                      const MixtureParams& omega) {
  check_pair(counts, x, omega);
  const MatrixXd resp = responsibilities(x, omega);
  VectorXd next = resp * counts.freq;
  // Responsibility columns sum to one, so next is already on the simplex
  // up to rounding; renormalize to keep the invariant exact.
  next /= next.sum();
  return next;
}

VectorXd grad_q_theta(const SampleCounts& counts, const FeatureMatrix& x,
                      const MixtureParams& omega, Eigen::Index k) {
  check_pair(counts, x, omega);
  if (k < 0 || k >= omega.k()) throw InvalidInputError("grad_q_theta: component index out of range");
  const MatrixXd resp = responsibilities(x, omega);
  const VectorXd a = softmax_component(x, omega.thetas.row(k).transpose());
  const VectorXd mean_feature = x.rows.transpose() * a;  // X' A(theta_k)
  const VectorXd w = counts.freq.array() * resp.row(k).transpose().array();
  return x.rows.transpose() * w - w.sum() * mean_feature;
}

namespace {

// One sweep given precomputed responsibilities; avoids recomputing them
// per component inside em_step / em_fit.
MixtureParams sweep(const SampleCounts& counts, const FeatureMatrix& x,
                    const MixtureParams& omega, const MatrixXd& resp,
                    const EmConfig& config) {
  MixtureParams next;
  VectorXd alpha = resp * counts.freq;
  alpha /= alpha.sum();
  next.alpha = alpha;
  next.thetas = omega.thetas;
  for (Eigen::Index k = 0; k < omega.k(); ++k) {
    const VectorXd a = softmax_component(x, omega.thetas.row(k).transpose());
    const VectorXd mean_feature = x.rows.transpose() * a;
    const VectorXd w = counts.freq.array() * resp.row(k).transpose().array();
    const VectorXd grad = x.rows.transpose() * w - w.sum() * mean_feature;
    next.thetas.row(k) += config.step_size * grad.transpose();
  }
  return next;
}

}  // namespace

MixtureParams em_step(const SampleCounts& counts, const FeatureMatrix& x,
                      const MixtureParams& omega, const EmConfig& config) {
  check_pair(counts, x, omega);
  config.validate();
  return sweep(counts, x, omega, responsibilities(x, omega), config);
}

EmResult em_fit(const SampleCounts& counts, const FeatureMatrix& x,
                const MixtureParams& omega0, const EmConfig& config) {
  check_pair(counts, x, omega0);
  config.validate();

  EmResult result;
  result.alpha_floor_hit = omega0.alpha.minCoeff() <= 0.0;
  MixtureParams omega = omega0;
  double prev_ll = log_likelihood(counts, x, omega);
  if (config.track_trace) result.loglik_trace.push_back(prev_ll);

  for (int t = 1; t <= config.max_iters; ++t) {
    omega = sweep(counts, x, omega, responsibilities(x, omega), config);
    if (omega.alpha.minCoeff() <= 0.0) result.alpha_floor_hit = true;
    double ll;
    try {
      ll = log_likelihood(counts, x, omega);
    } catch (const NumericDegeneracyError& e) {
      throw NumericDegeneracyError("em_fit: degenerate likelihood at iteration " +
                                   std::to_string(t) + ": " + e.what());
    }
    result.iters_used = t;
    if (config.track_trace) result.loglik_trace.push_back(ll);
    if (std::abs(ll - prev_ll) / std::max(1.0, std::abs(prev_ll)) < config.rel_tol) {
      result.converged = true;
      prev_ll = ll;
      break;
    }
    prev_ll = ll;
  }
  result.omega_hat = omega;
  result.final_loglik = prev_ll;
  return result;
}

SampleCounts population_counts(const FeatureMatrix& x, const MixtureParams& omega_star) {
  omega_star.validate();
  SampleCounts out;
  out.freq = mixture_pmf(x, omega_star);
  out.n_samples = 0;
  out.population = true;
  return out;
}

}  // namespace softmix
