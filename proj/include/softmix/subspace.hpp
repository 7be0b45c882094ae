#pragma once

#include <vector>

#include "softmix/model.hpp"

namespace softmix {

// Second-moment matrix estimate and its leading eigenspace. The columns of
// v_hat estimate the span of the component parameter vectors.
struct SubspaceEstimate {
  MatrixXd gamma_hat;  // L x L, symmetric
  MatrixXd v_hat;      // L x K, orthonormal columns
  VectorXd eigvals;    // top K eigenvalues, descending
};

// Gamma_hat = sum_j freq_j (Sigma^-1 x_j)(Sigma^-1 x_j)' - Sigma^-1,
// symmetrized. Estimates sum_k alpha_k theta_k theta_k' when the features
// are N(0, Sigma) draws.
MatrixXd estimate_gamma(const SampleCounts& counts, const FeatureMatrix& x,
                        const MatrixXd& sigma);

// Sigma = I specialization.
MatrixXd estimate_gamma(const SampleCounts& counts, const FeatureMatrix& x);

// Top-K symmetric eigendecomposition with a deterministic sign convention:
// the largest-magnitude entry of each eigenvector is made positive.
SubspaceEstimate top_eigenspace(const MatrixXd& gamma_hat, int k);

// Unit vector uniform on the span of v_hat: normalize v_hat v_hat' u with
// u standard normal. Deterministic given the stream.
VectorXd projected_direction(const MatrixXd& v_hat, RngStream rng);

// Draws n_candidates directions in the estimated subspace and keeps the
// one whose projected, denoised Hankel moment matrix has the largest
// determinant, i.e. the axis along which the atoms separate most.
VectorXd select_axis(const SampleCounts& counts, const FeatureMatrix& x,
                     const MatrixXd& v_hat, int k, double b, int n_candidates,
                     RngStream rng);

// Selection step on an explicit candidate list (exposed for tests).
VectorXd select_axis_from_candidates(const SampleCounts& counts,
                                     const FeatureMatrix& x,
                                     const std::vector<VectorXd>& candidates,
                                     int k, double b);

// Initialization recipes for the iterative fit:
//   kSubspace ("dr")  - unit vectors uniform on the span of v_hat;
//   kAmbient  ("rand") - entries iid N(0, 1/sqrt(L)) in the full space.
// Weights start uniform in both modes.
enum class InitMode { kSubspace, kAmbient };

std::vector<MixtureParams> random_inits(const MatrixXd& v_hat, int k, int m,
                                        InitMode mode, RngStream rng);

}  // namespace softmix
