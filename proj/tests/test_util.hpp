#pragma once

#include <cmath>
#include <vector>

#include "softmix/model.hpp"
#include "softmix/rng.hpp"

namespace softmix::testutil {

inline FeatureMatrix random_features(Eigen::Index p, Eigen::Index l, RngStream rng) {
  FeatureMatrix x;
  x.rows.resize(p, l);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index c = 0; c < l; ++c) x.rows(j, c) = rng.normal();
  return x;
}

// Random valid parameters with weights bounded away from zero and
// component norms <= max_norm.
inline MixtureParams random_params(Eigen::Index k, Eigen::Index l, RngStream rng,
                                   double max_norm = 1.0, double min_weight = 0.1) {
  MixtureParams omega;
  VectorXd raw(k);
  for (Eigen::Index i = 0; i < k; ++i) raw[i] = rng.uniform() + 0.05;
  raw /= raw.sum();
  // floor guarantees min_k alpha_k >= min_weight exactly
  omega.alpha = VectorXd::Constant(k, min_weight) +
                (1.0 - static_cast<double>(k) * min_weight) * raw;
  omega.thetas.resize(k, l);
  for (Eigen::Index i = 0; i < k; ++i) {
    VectorXd t = rng.normal_vector(l);
    t *= (0.2 + 0.8 * rng.uniform()) * max_norm / t.norm();
    omega.thetas.row(i) = t.transpose();
  }
  return omega;
}

inline SampleCounts random_counts(Eigen::Index p, RngStream rng) {
  SampleCounts counts;
  counts.freq.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) counts.freq[j] = rng.uniform() + 0.05;
  counts.freq /= counts.freq.sum();
  counts.n_samples = 0;
  counts.population = true;
  return counts;
}

// Largest principal angle between the column spans of two orthonormal
// bases, computed from sin = ||(I - U U') V||_op.
inline double largest_principal_angle(const MatrixXd& u, const MatrixXd& v) {
  const MatrixXd resid = v - u * (u.transpose() * v);
  Eigen::JacobiSVD<MatrixXd> svd(resid);
  const double s = std::min(1.0, svd.singularValues()[0]);
  return std::asin(s);
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace softmix::testutil
