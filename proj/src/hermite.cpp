#include "softmix/hermite.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "softmix/errors.hpp"

namespace softmix {

namespace {

void check_degree(int k) {
  if (k < 1) throw InvalidInputError("moments: K must be >= 1");
  if (2 * k - 1 > kMaxMomentDegree)
    throw UnsupportedDegreeError("moments: degree " + std::to_string(2 * k - 1) +
                                 " exceeds cap " + std::to_string(kMaxMomentDegree));
}

// Row r holds H_r evaluated at every entry of z, r = 0 .. degree.
MatrixXd hermite_table(const VectorXd& z, int degree) {
  MatrixXd h(degree + 1, z.size());
  h.row(0).setOnes();
  if (degree >= 1) h.row(1) = z.transpose();
  for (int r = 1; r < degree; ++r)
    h.row(r + 1) = z.transpose().cwiseProduct(h.row(r)) - static_cast<double>(r) * h.row(r - 1);
  return h;
}

}  // namespace

void AxisFrame::validate() const {
  if (v.size() < 1) throw InvalidInputError("AxisFrame: empty axis");
  if (w.rows() != v.size() || w.cols() != v.size() - 1)
    throw InvalidInputError("AxisFrame: completion has wrong shape");
  if (std::abs(v.norm() - 1.0) > 1e-12) throw InvalidInputError("AxisFrame: axis not unit length");
  MatrixXd full(v.size(), v.size());
  full.col(0) = v;
  full.rightCols(v.size() - 1) = w;
  if ((full.transpose() * full - MatrixXd::Identity(v.size(), v.size())).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidInputError("AxisFrame: columns not orthonormal");
}

double hermite_eval(int r, double x) {
  if (r < 0) throw InvalidInputError("hermite_eval: negative degree");
  if (r == 0) return 1.0;
  double prev = 1.0;  // H_0
  double cur = x;     // H_1
  for (int i = 1; i < r; ++i) {
    const double next = x * cur - static_cast<double>(i) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

LatentMoments estimate_moments(const SampleCounts& counts, const FeatureMatrix& x,
                               const AxisFrame& frame, int k, double b) {
  check_degree(k);
  counts.validate();
  frame.validate();
  if (counts.freq.size() != x.p())
    throw InvalidInputError("estimate_moments: counts do not match support size");
  if (frame.dim() != x.dim())
    throw InvalidInputError("estimate_moments: frame dimension mismatch");

  const VectorXd z = x.rows * frame.v;                 // p projections on the axis
  const MatrixXd h = hermite_table(z, 2 * k - 1);      // (2K) x p
  LatentMoments out;
  out.k = k;
  out.b = b;
  out.m = h * counts.freq;                             // m[r] = sum_j freq_j H_r(z_j)
  out.mixed.resize(x.dim() - 1, k);
  // mixed(i-2, r) = sum_j freq_j H_r(z_j) (x_j' w_i); one GEMM per r.
  const MatrixXd wx = x.rows * frame.w;                // p x (L-1)
  for (int r = 0; r < k; ++r)
    out.mixed.col(r) = wx.transpose() * counts.freq.cwiseProduct(h.row(r).transpose());
  return out;
}

VectorXd axis_moments(const SampleCounts& counts, const FeatureMatrix& x,
                      const VectorXd& v, int k) {
  check_degree(k);
  if (v.size() != x.dim()) throw InvalidInputError("axis_moments: axis dimension mismatch");
  const VectorXd z = x.rows * v;
  return hermite_table(z, 2 * k - 1) * counts.freq;
}

LatentMoments population_latent_moments(const MixtureParams& omega_star,
                                        const AxisFrame& frame, int k) {
  check_degree(k);
  omega_star.validate();
  frame.validate();
  if (frame.dim() != omega_star.dim())
    throw InvalidInputError("population_latent_moments: frame dimension mismatch");

  const VectorXd proj = omega_star.thetas * frame.v;   // v' theta_k per component
  const MatrixXd rest = omega_star.thetas * frame.w;   // K x (L-1), w_i' theta_k
  LatentMoments out;
  out.k = k;
  out.b = omega_star.thetas.rowwise().norm().maxCoeff();
  out.m.resize(2 * k);
  for (int r = 0; r < 2 * k; ++r) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < omega_star.k(); ++c)
      s += omega_star.alpha[c] * std::pow(proj[c], r);
    out.m[r] = s;
  }
  out.mixed = MatrixXd::Zero(omega_star.dim() - 1, k);
  for (int r = 0; r < k; ++r)
    for (Eigen::Index c = 0; c < omega_star.k(); ++c)
      out.mixed.col(r) += omega_star.alpha[c] * std::pow(proj[c], r) * rest.row(c).transpose();
  return out;
}

MatrixXd rescale_for_covariance(const MatrixXd& thetas, const MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != thetas.cols())
    throw InvalidInputError("rescale_for_covariance: shape mismatch");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidInputError("rescale_for_covariance: Sigma not symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 1e-10)
    throw InvalidInputError("rescale_for_covariance: Sigma not positive definite");
  Eigen::LLT<MatrixXd> llt(sigma);
  return llt.solve(thetas.transpose()).transpose();
}

}  // namespace softmix
