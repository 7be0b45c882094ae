#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "softmix/rng.hpp"

namespace softmix {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Support points of the discrete mixture: row j holds the feature vector
// x_j in R^L. The p points are the categories the model assigns mass to.
struct FeatureMatrix {
  MatrixXd rows;  // p x L

  Eigen::Index p() const { return rows.rows(); }
  Eigen::Index dim() const { return rows.cols(); }

  // p >= 2, L >= 1, all entries finite.
  void validate() const;
};

// Full parameter set of a K-component softmax mixture: mixing weights on
// the simplex and one parameter vector per component (row k of thetas).
struct MixtureParams {
  VectorXd alpha;   // length K
  MatrixXd thetas;  // K x L

  Eigen::Index k() const { return alpha.size(); }
  Eigen::Index dim() const { return thetas.cols(); }

  void validate() const;
};

// Data summary: empirical frequencies over the p support points. Every
// estimator in this library depends on the sample only through freq, so
// the raw draws are never stored. population == true marks the infinite-
// sample limit where freq holds exact model probabilities (n_samples is
// then the sentinel 0).
struct SampleCounts {
  VectorXd freq;  // length p, sums to one
  std::int64_t n_samples = 0;
  bool population = false;

  void validate() const;
};

// Single-component probabilities A(theta): softmax of X * theta over the
// support points. Computed with max-subtraction so arbitrarily large
// inner products x_j' theta do not overflow.
VectorXd softmax_component(const FeatureMatrix& x, const VectorXd& theta);

// log A(theta); always finite for finite inputs.
VectorXd log_softmax_component(const FeatureMatrix& x, const VectorXd& theta);

// Mixture probabilities pi(x_j; omega) = sum_k alpha_k A(x_j; theta_k).
VectorXd mixture_pmf(const FeatureMatrix& x, const MixtureParams& omega);

// log pi, evaluated in log space (weights floored at 1e-300 before logs).
VectorXd log_mixture_pmf(const FeatureMatrix& x, const MixtureParams& omega);

// Draws n iid categorical samples from mixture_pmf and returns their
// frequencies. Deterministic given the stream.
SampleCounts sample(const FeatureMatrix& x, const MixtureParams& omega,
                    std::int64_t n, RngStream rng);

// Average log-likelihood sum_j freq_j log pi(x_j; omega).
double log_likelihood(const SampleCounts& counts, const FeatureMatrix& x,
                      const MixtureParams& omega);

// Posterior component probabilities: entry (k, j) is the probability that
// support point x_j was generated by component k. Columns sum to one.
MatrixXd responsibilities(const FeatureMatrix& x, const MixtureParams& omega);

// max( scale_theta * max_k ||theta_k - theta_k'||_2 ,
//      ||alpha - alpha'||_inf / scale_alpha ).
// No permutation matching; components are compared index-wise.
double param_distance(const MixtureParams& omega, const MixtureParams& omega_ref,
                      double scale_theta, double scale_alpha);

// Defaults: scale_theta = 1, scale_alpha = min_k alpha_ref[k].
double param_distance(const MixtureParams& omega, const MixtureParams& omega_ref);

}  // namespace softmix
