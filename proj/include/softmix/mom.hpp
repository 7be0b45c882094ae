#pragma once

#include "softmix/hermite.hpp"
#include "softmix/model.hpp"

namespace softmix {

// The two K x K Hankel matrices built from a moment vector (m_0 ... m_{2K-1}):
// h holds (m_0 ... m_{2K-2}), s the shifted sequence (m_1 ... m_{2K-1}).
// A vector is a valid moment sequence of a measure on [-B, B] exactly when
// B*h + s and B*h - s are both positive semidefinite.
struct HankelPair {
  MatrixXd h;
  MatrixXd s;
};

HankelPair hankel_pair(const VectorXd& m);

struct ProjectionDiagnostics {
  int iterations = 0;
  double infeasibility = 0.0;  // most negative localizing eigenvalue at exit
};

struct MomDiagnostics {
  int projection_iters = 0;
  double min_hankel_eig = 0.0;
  double vandermonde_cond = 0.0;
};

struct MomResult {
  MixtureParams omega_hat;
  VectorXd roots;  // recovered axis coordinates, ascending
  LatentMoments projected_moments;
  MomDiagnostics diagnostics;
};

// Euclidean projection of m onto the set of valid truncated moment vectors
// on [-B, B] with m~[0] = 1. Solved as a small semidefinite feasibility
// problem by ADMM splitting on the two localizing cones; no external
// solver. Throws ProjectionFailureError when the iteration cap is hit
// while still infeasible.
VectorXd project_to_valid_moments(const VectorXd& m, double b,
                                  ProjectionDiagnostics* diag = nullptr);

// Coefficients of the monic degree-K annihilating polynomial solve the
// Hankel system H c = -(m_K ... m_{2K-1})'; its roots (companion-matrix
// eigenvalues) are the axis coordinates of the atoms, ascending.
VectorXd hankel_root_recovery(const VectorXd& m_tilde, int k);

// Remaining coordinates: row i-2, column k holds mixed_{1;i}' M~^+ u(root_k)
// with u(t) = (1, t, ..., t^{K-1}), clipped to [-B, B]. M~ is the Hankel of
// the projected moments; the mixed moments stay unprojected.
MatrixXd recover_coordinates(const LatentMoments& moments, const VectorXd& roots,
                             double b);

// Weights from the Vandermonde system in the roots, then projected onto
// the probability simplex.
VectorXd recover_weights(const VectorXd& m_tilde, const VectorXd& roots);

// Euclidean projection onto the probability simplex (sort and threshold).
VectorXd simplex_project(const VectorXd& y);

// Deterministic orthonormal completion of a unit vector via a Householder
// reflection; [v | w] is an orthonormal basis with first column v.
AxisFrame complete_basis(const VectorXd& v);

// Full pipeline in the frame of v: estimate moments, project, recover
// roots / coordinates / weights, rotate back to the standard basis.
MomResult mom_fit(const SampleCounts& counts, const FeatureMatrix& x, int k,
                  double b, const VectorXd& v);

// Recovery stages only, from externally supplied moments. Used with exact
// population moments as the oracle path.
MomResult mom_fit_from_moments(const LatentMoments& moments, double b,
                               const AxisFrame& frame);

}  // namespace softmix
