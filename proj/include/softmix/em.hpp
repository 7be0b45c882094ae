#pragma once

#include <vector>

#include "softmix/model.hpp"

namespace softmix {

struct EmConfig {
  double step_size = 0.2;  // shared gradient step for all components
  int max_iters = 500;
  double rel_tol = 1e-6;   // relative log-likelihood change threshold
  bool track_trace = false;

  void validate() const;
};

struct EmResult {
  MixtureParams omega_hat;
  int iters_used = 0;
  std::vector<double> loglik_trace;  // iters_used + 1 entries when tracked
  double final_loglik = 0.0;
  bool converged = false;
  bool alpha_floor_hit = false;  // an iterate carried a zero mixing weight
};

// Surrogate objective maximized by one EM sweep: responsibilities are taken
// at omega_prev, the complete-data log-likelihood at omega.
double q_function(const SampleCounts& counts, const FeatureMatrix& x,
                  const MixtureParams& omega, const MixtureParams& omega_prev);

// Closed-form weight update: alpha_k <- sum_j freq_j g(k | x_j; omega).
VectorXd update_alpha(const SampleCounts& counts, const FeatureMatrix& x,
                      const MixtureParams& omega);

// Gradient of q_function(. | omega) with respect to theta_k, evaluated at
// omega itself: sum_j freq_j g(k | x_j) (x_j - X' A(theta_k)).
VectorXd grad_q_theta(const SampleCounts& counts, const FeatureMatrix& x,
                      const MixtureParams& omega, Eigen::Index k);

// One hybrid sweep: exact alpha update plus a single gradient-ascent step
// on each theta_k. Both use the incoming omega; no interleaving.
MixtureParams em_step(const SampleCounts& counts, const FeatureMatrix& x,
                      const MixtureParams& omega, const EmConfig& config);

// Iterates em_step until the relative log-likelihood change drops below
// rel_tol or max_iters is reached.
EmResult em_fit(const SampleCounts& counts, const FeatureMatrix& x,
                const MixtureParams& omega0, const EmConfig& config);

// Infinite-sample counts: freq set to the exact mixture pmf at omega_star.
// Feeding these to em_fit realizes the population-limit iteration.
SampleCounts population_counts(const FeatureMatrix& x, const MixtureParams& omega_star);

}  // namespace softmix
