#pragma once

#include "softmix/model.hpp"

namespace softmix {

// Largest Hermite degree the moment estimators will evaluate. Beyond this
// the downstream Hankel recovery is numerically hopeless in doubles.
inline constexpr int kMaxMomentDegree = 25;

// Orthonormal frame anchored at a primary axis: v plus L-1 completing
// columns w_2 ... w_L.
struct AxisFrame {
  VectorXd v;  // unit length-L vector
  MatrixXd w;  // L x (L-1)

  Eigen::Index dim() const { return v.size(); }
  void validate() const;
};

// Estimated moments of the mixing measure seen through an axis frame:
//   m[r]          ~ sum_k alpha_k (v' theta_k)^r,        r = 0 .. 2K-1
//   mixed(i-2, r) ~ sum_k alpha_k (v' theta_k)^r (w_i' theta_k),
//                                     r = 0 .. K-1, i = 2 .. L.
struct LatentMoments {
  VectorXd m;      // length 2K, m[0] == 1
  MatrixXd mixed;  // (L-1) x K
  int k = 0;
  double b = 0.0;  // support bound carried to the recovery stage
};

// Probabilist's Hermite polynomial H_r(x) by the three-term recurrence
// H_{r+1} = x H_r - r H_{r-1}.
double hermite_eval(int r, double x);

// Frequency-weighted sample moments: m[r] = sum_j freq_j H_r(x_j' v) and
// mixed(i-2, r) = sum_j freq_j H_r(x_j' v) (x_j' w_i). Valid latent-moment
// estimates when the features are standard normal draws.
LatentMoments estimate_moments(const SampleCounts& counts, const FeatureMatrix& x,
                               const AxisFrame& frame, int k, double b);

// Axis moments only (no mixed block); used by the axis search where the
// full moment set is not needed.
VectorXd axis_moments(const SampleCounts& counts, const FeatureMatrix& x,
                      const VectorXd& v, int k);

// Exact latent moments of the mixing measure of omega_star in the given
// frame. Serves as the oracle for exact-recovery tests.
LatentMoments population_latent_moments(const MixtureParams& omega_star,
                                        const AxisFrame& frame, int k);

// Maps each recovered row through Sigma^{-1} (solved, not inverted). Used
// when the features follow N(0, Sigma) instead of N(0, I).
MatrixXd rescale_for_covariance(const MatrixXd& thetas, const MatrixXd& sigma);

}  // namespace softmix
