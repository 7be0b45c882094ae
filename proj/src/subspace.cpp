#include "softmix/subspace.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "softmix/errors.hpp"
#include "softmix/hermite.hpp"
#include "softmix/mom.hpp"

namespace softmix {

namespace {

void check_counts(const SampleCounts& counts, const FeatureMatrix& x) {
  counts.validate();
  if (counts.freq.size() != x.p())
    throw InvalidInputError("subspace: counts do not match support size");
}

VectorXd unit_span_vector(const MatrixXd& v_hat, RngStream base) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    RngStream rng = base.child("attempt", static_cast<std::uint64_t>(attempt));
    const VectorXd u = rng.normal_vector(v_hat.rows());
    const VectorXd y = v_hat * (v_hat.transpose() * u);
    const double norm = y.norm();
    if (norm >= 1e-12) return y / norm;
  }
  throw NumericDegeneracyError("projected_direction: degenerate draws exhausted retries");
}

}  // namespace

MatrixXd estimate_gamma(const SampleCounts& counts, const FeatureMatrix& x,
                        const MatrixXd& sigma) {
  check_counts(counts, x);
  const Eigen::Index l = x.dim();
  if (sigma.rows() != l || sigma.cols() != l)
    throw InvalidInputError("estimate_gamma: Sigma shape mismatch");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidInputError("estimate_gamma: Sigma not symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 1e-10)
    throw InvalidInputError("estimate_gamma: Sigma not positive definite");

  Eigen::LLT<MatrixXd> llt(sigma);
  const MatrixXd z = llt.solve(x.rows.transpose()).transpose();  // rows: Sigma^-1 x_j
  const MatrixXd second = z.transpose() * counts.freq.asDiagonal() * z;
  const MatrixXd gamma = second - llt.solve(MatrixXd::Identity(l, l));
  return 0.5 * (gamma + gamma.transpose());
}

MatrixXd estimate_gamma(const SampleCounts& counts, const FeatureMatrix& x) {
  check_counts(counts, x);
  const Eigen::Index l = x.dim();
  const MatrixXd second = x.rows.transpose() * counts.freq.asDiagonal() * x.rows;
  const MatrixXd gamma = second - MatrixXd::Identity(l, l);
  return 0.5 * (gamma + gamma.transpose());
}

SubspaceEstimate top_eigenspace(const MatrixXd& gamma_hat, int k) {
  const Eigen::Index l = gamma_hat.rows();
  if (gamma_hat.cols() != l) throw InvalidInputError("top_eigenspace: matrix not square");
  if (k < 1 || k > l) throw InvalidInputError("top_eigenspace: K out of range");
  if ((gamma_hat - gamma_hat.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidInputError("top_eigenspace: matrix not symmetric");

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (gamma_hat + gamma_hat.transpose()));
  if (es.info() != Eigen::Success)
    throw NumericDegeneracyError("top_eigenspace: eigendecomposition failed");

  SubspaceEstimate out;
  out.gamma_hat = 0.5 * (gamma_hat + gamma_hat.transpose());
  out.v_hat.resize(l, k);
  out.eigvals.resize(k);
  // Eigen sorts ascending; take the top K in descending order.
  for (int i = 0; i < k; ++i) {
    const Eigen::Index src = l - 1 - i;
    VectorXd col = es.eigenvectors().col(src);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col[arg] < 0.0) col = -col;
    out.v_hat.col(i) = col;
    out.eigvals[i] = es.eigenvalues()[src];
  }
  return out;
}

VectorXd projected_direction(const MatrixXd& v_hat, RngStream rng) {
  if (v_hat.rows() < 1 || v_hat.cols() < 1)
    throw InvalidInputError("projected_direction: empty basis");
  return unit_span_vector(v_hat, rng);
}

VectorXd select_axis_from_candidates(const SampleCounts& counts,
                                     const FeatureMatrix& x,
                                     const std::vector<VectorXd>& candidates,
                                     int k, double b) {
  if (candidates.empty()) throw InvalidInputError("select_axis: no candidates");
  check_counts(counts, x);

  bool found = false;
  double best_det = 0.0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    try {
      const VectorXd m_hat = axis_moments(counts, x, candidates[i], k);
      const VectorXd m_tilde = project_to_valid_moments(m_hat, b);
      MatrixXd hank(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) hank(r, c) = m_tilde[r + c];
      const double det = hank.determinant();
      if (!found || det > best_det) {
        found = true;
        best_det = det;
        best = i;
      }
    } catch (const MomFailureError&) {
      continue;  // candidate unusable; keep scanning
    }
  }
  if (!found)
    throw AxisSelectionError("all " + std::to_string(candidates.size()) +
                             " candidate axes failed moment projection");
  return candidates[best];
}

VectorXd select_axis(const SampleCounts& counts, const FeatureMatrix& x,
                     const MatrixXd& v_hat, int k, double b, int n_candidates,
                     RngStream rng) {
  if (n_candidates < 1) throw InvalidInputError("select_axis: need at least one candidate");
  std::vector<VectorXd> candidates;
  candidates.reserve(static_cast<std::size_t>(n_candidates));
  for (int i = 0; i < n_candidates; ++i)
    candidates.push_back(projected_direction(v_hat, rng.child("candidate", static_cast<std::uint64_t>(i))));
  return select_axis_from_candidates(counts, x, candidates, k, b);
}

std::vector<MixtureParams> random_inits(const MatrixXd& v_hat, int k, int m,
                                        InitMode mode, RngStream rng) {
  if (m < 1) throw InvalidInputError("random_inits: need m >= 1");
  if (k < 1) throw InvalidInputError("random_inits: need K >= 1");
  const Eigen::Index l = v_hat.rows();
  const double ambient_sd = std::pow(static_cast<double>(l), -0.25);  // Var = 1/sqrt(L)

  std::vector<MixtureParams> inits;
  inits.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    RngStream init_rng = rng.child("init", static_cast<std::uint64_t>(i));
    MixtureParams omega;
    omega.alpha = VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    omega.thetas.resize(k, l);
    for (int c = 0; c < k; ++c) {
      RngStream comp = init_rng.child("component", static_cast<std::uint64_t>(c));
      if (mode == InitMode::kSubspace) {
        omega.thetas.row(c) = unit_span_vector(v_hat, comp).transpose();
      } else {
        omega.thetas.row(c) = (ambient_sd * comp.normal_vector(l)).transpose();
      }
    }
    inits.push_back(std::move(omega));
  }
  return inits;
}

}  // namespace softmix
