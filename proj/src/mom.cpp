#include "softmix/mom.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "softmix/errors.hpp"

namespace softmix {

namespace {

constexpr int kProjectionCap = 20000;
constexpr double kProjectionFeasTol = 1e-9;   // guarantees localizing eigs >= -1e-8
constexpr double kProjectionMoveTol = 1e-10;
constexpr double kPinvCutoff = 1e-10;         // relative singular-value cutoff

MatrixXd hankel_from(const VectorXd& gen, Eigen::Index k) {
  MatrixXd h(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) h(i, j) = gen[i + j];
  return h;
}

double min_eig(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

MatrixXd psd_clip(const MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
  VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Averages of T over its anti-diagonals r = 0 .. 2k-2.
VectorXd antidiag_means(const MatrixXd& t) {
  const Eigen::Index k = t.rows();
  VectorXd sums = VectorXd::Zero(2 * k - 1);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) sums[i + j] += t(i, j);
  for (Eigen::Index r = 0; r < 2 * k - 1; ++r)
    sums[r] /= static_cast<double>(std::min(r, 2 * k - 2 - r) + 1);
  return sums;
}

// Localizing matrices B*H +- S of the current iterate.
void localizing(const VectorXd& u, double b, Eigen::Index k, MatrixXd* plus,
                MatrixXd* minus) {
  plus->resize(k, k);
  minus->resize(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      const double lo = b * u[i + j];
      const double hi = u[i + j + 1];
      (*plus)(i, j) = lo + hi;
      (*minus)(i, j) = lo - hi;
    }
}

// Moore-Penrose pseudo-inverse with singular values below
// kPinvCutoff * sigma_max dropped.
MatrixXd pinv(const MatrixXd& m, double* cond = nullptr) {
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  const double cutoff = kPinvCutoff * sv[0];
  VectorXd inv = VectorXd::Zero(sv.size());
  double smallest_kept = sv[0];
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cutoff) {
      inv[i] = 1.0 / sv[i];
      smallest_kept = sv[i];
    }
  }
  if (cond) *cond = sv[0] / smallest_kept;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

VectorXd powers(double t, int k) {
  VectorXd u(k);
  double acc = 1.0;
  for (int r = 0; r < k; ++r) {
    u[r] = acc;
    acc *= t;
  }
  return u;
}

}  // namespace

HankelPair hankel_pair(const VectorXd& m) {
  if (m.size() < 2 || m.size() % 2 != 0)
    throw InvalidInputError("hankel_pair: moment vector length must be even and >= 2");
  const Eigen::Index k = m.size() / 2;
  HankelPair out;
  out.h = hankel_from(m.head(2 * k - 1), k);
  out.s = hankel_from(m.tail(2 * k - 1), k);
  return out;
}

VectorXd project_to_valid_moments(const VectorXd& m, double b,
                                  ProjectionDiagnostics* diag) {
  if (!(b > 0.0)) throw InvalidInputError("project_to_valid_moments: B must be positive");
  if (m.size() < 2 || m.size() % 2 != 0)
    throw InvalidInputError("project_to_valid_moments: moment vector length must be even");
  if (!m.allFinite()) throw InvalidInputError("project_to_valid_moments: non-finite moments");
  if (std::abs(m[0] - 1.0) > 1e-9)
    throw InvalidInputError("project_to_valid_moments: m[0] must be 1");

  const Eigen::Index k = m.size() / 2;
  const Eigen::Index n = m.size();
  MatrixXd gp, gm;

  // Feasibility tolerance is relative to the moment scale; for the unit
  // support bounds used throughout the benchmark this is the absolute
  // 1e-9 localizing-eigenvalue bound.
  const double feas_tol = kProjectionFeasTol * std::max(1.0, m.cwiseAbs().maxCoeff());

  // Fast path: an already-valid vector is its own projection.
  localizing(m, b, k, &gp, &gm);
  double infeas = -std::min(min_eig(gp), min_eig(gm));
  if (infeas <= feas_tol) {
    if (diag) {
      diag->iterations = 0;
      diag->infeasibility = std::max(infeas, 0.0);
    }
    return m;
  }

  // ADMM on  min ||u - m||^2  s.t.  B*H(u) + S(u) = P >= 0,
  //                                 B*H(u) - S(u) = Q >= 0,  u_0 = 1.
  // The u-update decouples coordinate-wise because the cross terms of the
  // two localizing penalties cancel.
  VectorXd u = m;
  u[0] = 1.0;
  localizing(u, b, k, &gp, &gm);
  MatrixXd p = psd_clip(gp);
  MatrixXd q = psd_clip(gm);
  MatrixXd dual_p = MatrixXd::Zero(k, k);
  MatrixXd dual_q = MatrixXd::Zero(k, k);
  double rho = 1.0;

  VectorXd counts(2 * k - 1);  // anti-diagonal multiplicities
  for (Eigen::Index r = 0; r < 2 * k - 1; ++r)
    counts[r] = static_cast<double>(std::min(r, 2 * k - 2 - r) + 1);

  int stalled = 0;
  int iter = 0;
  for (iter = 1; iter <= kProjectionCap; ++iter) {
    const VectorXd a = antidiag_means(p - dual_p);
    const VectorXd c = antidiag_means(q - dual_q);
    VectorXd u_next = u;
    for (Eigen::Index s = 1; s < n; ++s) {
      double num = 2.0 * m[s];
      double den = 2.0;
      if (s <= 2 * k - 2) {  // coefficient of B u_s inside anti-diagonal s
        num += rho * counts[s] * b * (a[s] + c[s]);
        den += 2.0 * rho * counts[s] * b * b;
      }
      // coefficient of u_s inside anti-diagonal s-1
      num += rho * counts[s - 1] * (a[s - 1] - c[s - 1]);
      den += 2.0 * rho * counts[s - 1];
      u_next[s] = num / den;
    }
    const double move = (u_next - u).lpNorm<Eigen::Infinity>();
    u = u_next;

    localizing(u, b, k, &gp, &gm);
    const MatrixXd p_prev = p;
    const MatrixXd q_prev = q;
    p = psd_clip(gp + dual_p);
    q = psd_clip(gm + dual_q);
    dual_p += gp - p;
    dual_q += gm - q;

    const double resid = std::max((gp - p).norm(), (gm - q).norm());
    if (resid <= feas_tol && move < kProjectionMoveTol) break;  // settled
    stalled = (move < kProjectionMoveTol) ? stalled + 1 : 0;

    // Residual balancing keeps the splitting usable across the very
    // different scales the higher moments can take.
    if (iter % 50 == 0) {
      const double dual_resid =
          rho * std::max((p - p_prev).norm(), (q - q_prev).norm());
      if (resid > 10.0 * dual_resid && rho < 1e8) {
        rho *= 2.0;
        dual_p *= 0.5;
        dual_q *= 0.5;
      } else if (dual_resid > 10.0 * resid && rho > 1e-8) {
        rho *= 0.5;
        dual_p *= 2.0;
        dual_q *= 2.0;
      }
    }
    if (stalled >= 5000 || iter == kProjectionCap) {
      // The Frobenius consensus gap overestimates infeasibility; what the
      // output must certify is the localizing eigenvalue bound.
      infeas = std::max(-std::min(min_eig(gp), min_eig(gm)), 0.0);
      if (infeas <= feas_tol) break;
      if (diag) {
        diag->iterations = iter;
        diag->infeasibility = infeas;
      }
      throw ProjectionFailureError(
          "moment projection did not converge (infeasibility " + std::to_string(infeas) + ")",
          infeas);
    }
  }

  if (diag) {
    diag->iterations = iter;
    diag->infeasibility = std::max(-std::min(min_eig(gp), min_eig(gm)), 0.0);
  }
  return u;
}

VectorXd hankel_root_recovery(const VectorXd& m_tilde, int k) {
  if (k < 1) throw InvalidInputError("hankel_root_recovery: K must be >= 1");
  if (m_tilde.size() != 2 * k)
    throw InvalidInputError("hankel_root_recovery: expected 2K moments");

  const MatrixXd h = hankel_from(m_tilde.head(2 * k - 1), k);
  Eigen::JacobiSVD<MatrixXd> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[0] / sv[k - 1] > 1e12 || !std::isfinite(sv[0] / sv[k - 1]))
    throw DegenerateMomentsError("Hankel matrix numerically singular; atoms coincide");

  const VectorXd rhs = -m_tilde.tail(k);
  const VectorXd coef = svd.solve(rhs);  // monic polynomial coefficients c_0 .. c_{K-1}

  MatrixXd companion = MatrixXd::Zero(k, k);
  companion.col(k - 1) = -coef;
  if (k > 1) companion.block(1, 0, k - 1, k - 1).setIdentity();
  Eigen::EigenSolver<MatrixXd> es(companion);
  if (es.info() != Eigen::Success)
    throw DegenerateMomentsError("companion eigendecomposition failed");

  VectorXd roots(k);
  for (int i = 0; i < k; ++i) {
    const std::complex<double> z = es.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-6 * (1.0 + std::abs(z.real())))
      throw ComplexRootError("complex root " + std::to_string(z.real()) + " + " +
                             std::to_string(z.imag()) + "i");
    roots[i] = z.real();
  }
  std::sort(roots.data(), roots.data() + k);
  return roots;
}

MatrixXd recover_coordinates(const LatentMoments& moments, const VectorXd& roots,
                             double b) {
  const int k = moments.k;
  if (roots.size() != k) throw InvalidInputError("recover_coordinates: root count mismatch");
  const MatrixXd hank = hankel_from(moments.m.head(2 * k - 1), k);
  const MatrixXd hank_pinv = pinv(hank);
  MatrixXd basis(k, k);  // column k = (1, t_k, ..., t_k^{K-1})
  for (int c = 0; c < k; ++c) basis.col(c) = powers(roots[c], k);
  MatrixXd coords = moments.mixed * (hank_pinv * basis);
  return coords.cwiseMax(-b).cwiseMin(b);
}

VectorXd recover_weights(const VectorXd& m_tilde, const VectorXd& roots) {
  const int k = static_cast<int>(roots.size());
  MatrixXd vand(k, k);  // row r = roots^r
  for (int c = 0; c < k; ++c) vand.col(c) = powers(roots[c], k);
  const VectorXd rhs = m_tilde.head(k);
  return simplex_project(pinv(vand) * rhs);
}

VectorXd simplex_project(const VectorXd& y) {
  if (!y.allFinite()) throw InvalidInputError("simplex_project: non-finite input");
  const Eigen::Index k = y.size();
  std::vector<double> sorted(y.data(), y.data() + k);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double running = 0.0;
  double tau = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    running += sorted[static_cast<std::size_t>(i)];
    const double t = (running - 1.0) / static_cast<double>(i + 1);
    if (i + 1 == k || sorted[static_cast<std::size_t>(i + 1)] <= t) {
      tau = t;
      break;
    }
  }
  return (y.array() - tau).cwiseMax(0.0);
}

AxisFrame complete_basis(const VectorXd& v) {
  if (v.size() < 1) throw InvalidInputError("complete_basis: empty vector");
  if (!v.allFinite()) throw InvalidInputError("complete_basis: non-finite vector");
  const double norm = v.norm();
  if (norm < 1e-12) throw InvalidInputError("complete_basis: zero vector");

  const Eigen::Index l = v.size();
  AxisFrame frame;
  frame.v = v / norm;
  // Householder vector chosen with the stable sign so [v | w] is an exact
  // reflection up to the sign of its first column.
  VectorXd u = frame.v;
  if (u[0] >= 0.0)
    u[0] += 1.0;
  else
    u[0] -= 1.0;
  const double scale = 2.0 / u.squaredNorm();
  MatrixXd h = MatrixXd::Identity(l, l) - scale * (u * u.transpose());
  frame.w = h.rightCols(l - 1);
  return frame;
}

MomResult mom_fit_from_moments(const LatentMoments& moments, double b,
                               const AxisFrame& frame) {
  const int k = moments.k;
  ProjectionDiagnostics proj;
  const VectorXd m_tilde = project_to_valid_moments(moments.m, b, &proj);
  VectorXd roots = hankel_root_recovery(m_tilde, k);
  roots = roots.cwiseMax(-b - 1e-8).cwiseMin(b + 1e-8);

  LatentMoments projected = moments;
  projected.m = m_tilde;
  projected.b = b;
  const MatrixXd coords = recover_coordinates(projected, roots, b);

  MomResult result;
  result.roots = roots;
  result.projected_moments = projected;
  result.omega_hat.alpha = recover_weights(m_tilde, roots);

  const Eigen::Index l = frame.dim();
  result.omega_hat.thetas.resize(k, l);
  for (int c = 0; c < k; ++c)
    result.omega_hat.thetas.row(c) =
        (roots[c] * frame.v + frame.w * coords.col(c)).transpose();

  result.diagnostics.projection_iters = proj.iterations;
  result.diagnostics.min_hankel_eig = min_eig(hankel_from(m_tilde.head(2 * k - 1), k));
  MatrixXd vand(k, k);
  for (int c = 0; c < k; ++c) vand.col(c) = powers(roots[c], k);
  Eigen::JacobiSVD<MatrixXd> svd(vand);
  result.diagnostics.vandermonde_cond =
      svd.singularValues()[0] / svd.singularValues()[k - 1];
  return result;
}

MomResult mom_fit(const SampleCounts& counts, const FeatureMatrix& x, int k,
                  double b, const VectorXd& v) {
  if (k < 1) throw InvalidInputError("mom_fit: K must be >= 1");
  if (!(b > 0.0)) throw InvalidInputError("mom_fit: B must be positive");
  const AxisFrame frame = complete_basis(v);
  const LatentMoments moments = estimate_moments(counts, x, frame, k, b);
  return mom_fit_from_moments(moments, b, frame);
}

}  // namespace softmix
