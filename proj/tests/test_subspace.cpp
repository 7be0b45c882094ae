#include <doctest.h>

#include <cmath>

#include "softmix/bench.hpp"
#include "softmix/em.hpp"
#include "softmix/errors.hpp"
#include "softmix/subspace.hpp"
#include "test_util.hpp"

using namespace softmix;
using namespace softmix::testutil;

TEST_CASE("estimate_gamma: identity covariance, uniform counts") {
  RngStream rng(401);
  const FeatureMatrix x = random_features(40, 3, rng.child("x"));
  SampleCounts counts;
  counts.freq = VectorXd::Constant(40, 1.0 / 40.0);
  counts.population = true;
  const MatrixXd gamma = estimate_gamma(counts, x);
  const MatrixXd direct =
      x.rows.transpose() * x.rows / 40.0 - MatrixXd::Identity(3, 3);
  CHECK((gamma - direct).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((gamma - gamma.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("estimate_gamma: K = 1 Monte Carlo limit") {
  RngStream rng(402);
  const Eigen::Index p = 1000000;
  const int l = 5;
  const FeatureMatrix x = random_features(p, l, rng.child("x"));
  MixtureParams omega = random_params(1, l, rng.child("w"));
  omega.thetas.row(0) /= omega.thetas.row(0).norm();  // unit-norm component
  const SampleCounts counts = population_counts(x, omega);
  const MatrixXd gamma = estimate_gamma(counts, x);
  const MatrixXd target = omega.thetas.row(0).transpose() * omega.thetas.row(0);
  Eigen::JacobiSVD<MatrixXd> svd(gamma - target);
  CHECK(svd.singularValues()[0] <= 0.05);
}

TEST_CASE("estimate_gamma: scalar covariance algebra") {
  RngStream rng(403);
  const FeatureMatrix x = random_features(30, 3, rng.child("x"));
  const SampleCounts counts = random_counts(30, rng.child("c"));
  const MatrixXd sigma = 4.0 * MatrixXd::Identity(3, 3);
  const MatrixXd gamma = estimate_gamma(counts, x, sigma);
  // direct evaluation: sum_j freq_j (x_j/4)(x_j/4)' - I/4
  MatrixXd direct = MatrixXd::Zero(3, 3);
  for (Eigen::Index j = 0; j < 30; ++j)
    direct += counts.freq[j] * (x.rows.row(j) / 4.0).transpose() * (x.rows.row(j) / 4.0);
  direct -= MatrixXd::Identity(3, 3) / 4.0;
  CHECK((gamma - direct).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(estimate_gamma(counts, x, (-1.0 * sigma).eval()), InvalidInputError);
}

TEST_CASE("top_eigenspace: diagonal matrix and exact low rank") {
  MatrixXd diag = MatrixXd::Zero(3, 3);
  diag.diagonal() << 3.0, 2.0, 1.0;
  const SubspaceEstimate top = top_eigenspace(diag, 2);
  CHECK(top.eigvals[0] == doctest::Approx(3.0));
  CHECK(top.eigvals[1] == doctest::Approx(2.0));
  MatrixXd expected(3, 2);
  expected << 1, 0, 0, 1, 0, 0;
  CHECK(largest_principal_angle(top.v_hat, expected) <= 1e-12);

  // exact Gamma from orthonormal components
  RngStream rng(404);
  Scenario sc;
  sc.k = 3;
  sc.l = 8;
  sc.p = 10;
  sc.n = 10;
  sc.seed = 5;
  const ScenarioData data = generate_scenario(sc);
  MatrixXd gamma = MatrixXd::Zero(8, 8);
  for (int k = 0; k < 3; ++k)
    gamma += data.omega_star.alpha[k] * data.omega_star.thetas.row(k).transpose() *
             data.omega_star.thetas.row(k);
  const SubspaceEstimate sub = top_eigenspace(gamma, 3);
  CHECK(largest_principal_angle(sub.v_hat, data.omega_star.thetas.transpose()) <= 1e-10);
}

TEST_CASE("top_eigenspace: orthonormal output on rank-deficient input") {
  MatrixXd gamma = MatrixXd::Zero(4, 4);
  gamma(0, 0) = 1.0;  // rank 1 but K = 3 requested
  const SubspaceEstimate sub = top_eigenspace(gamma, 3);
  CHECK((sub.v_hat.transpose() * sub.v_hat - MatrixXd::Identity(3, 3))
            .cwiseAbs()
            .maxCoeff() <= 1e-10);
  CHECK(sub.eigvals[0] >= sub.eigvals[1]);
  CHECK(sub.eigvals[1] >= sub.eigvals[2]);
}

TEST_CASE("projected_direction: span membership and seed behavior") {
  RngStream rng(405);
  MatrixXd basis(5, 2);
  basis.setZero();
  basis(0, 0) = 1.0;
  basis(2, 1) = 1.0;
  const VectorXd v = projected_direction(basis, RngStream(1));
  CHECK(std::abs(v.norm() - 1.0) <= 1e-12);
  CHECK((v - basis * (basis.transpose() * v)).norm() <= 1e-10);

  // K = 1: the direction is the basis column up to sign
  MatrixXd single = basis.leftCols(1);
  const VectorXd u = projected_direction(single, RngStream(2));
  CHECK(std::abs(std::abs(u[0]) - 1.0) <= 1e-12);

  const VectorXd a = projected_direction(basis, RngStream(7));
  const VectorXd b = projected_direction(basis, RngStream(8));
  CHECK((a - b).norm() > 1e-6);
  const VectorXd c = projected_direction(basis, RngStream(7));
  CHECK((a - c).norm() == 0.0);
}

TEST_CASE("select_axis: single candidate, forced det criterion, determinism") {
  RngStream rng(406);
  Scenario sc;
  sc.k = 2;
  sc.l = 4;
  sc.p = 1500;
  sc.n = 1500;
  sc.seed = 11;
  // overwrite atoms with +-e1 so the separating axis is known
  ScenarioData data = generate_scenario(sc);
  data.omega_star.thetas.setZero();
  data.omega_star.thetas(0, 0) = 1.0;
  data.omega_star.thetas(1, 0) = -1.0;
  data.counts = population_counts(data.x, data.omega_star);

  std::vector<VectorXd> candidates = {VectorXd::Unit(4, 0), VectorXd::Unit(4, 1)};
  const VectorXd chosen =
      select_axis_from_candidates(data.counts, data.x, candidates, 2, 1.0);
  CHECK((chosen - candidates[0]).norm() <= 1e-14);  // separation 2 beats 0

  MatrixXd basis = MatrixXd::Identity(4, 2);
  const VectorXd n1 = select_axis(data.counts, data.x, basis, 2, 1.0, 1, RngStream(3));
  const VectorXd n1b = select_axis(data.counts, data.x, basis, 2, 1.0, 1, RngStream(3));
  CHECK((n1 - n1b).norm() == 0.0);
  CHECK((n1 - projected_direction(basis, RngStream(3).child("candidate", 0))).norm() ==
        0.0);
}

TEST_CASE("random_inits: subspace mode stays in span, ambient mode has the right scale") {
  RngStream rng(407);
  MatrixXd basis = MatrixXd::Zero(6, 2);
  basis(1, 0) = 1.0;
  basis(4, 1) = 1.0;
  const auto dr = random_inits(basis, 3, 5, InitMode::kSubspace, RngStream(9));
  CHECK(dr.size() == 5);
  for (const MixtureParams& omega : dr) {
    omega.validate();
    CHECK((omega.alpha.array() - 1.0 / 3.0).abs().maxCoeff() <= 1e-15);
    for (int k = 0; k < 3; ++k) {
      const VectorXd t = omega.thetas.row(k).transpose();
      CHECK(std::abs(t.norm() - 1.0) <= 1e-12);
      CHECK((t - basis * (basis.transpose() * t)).norm() <= 1e-10);
    }
  }

  const int l = 100;
  const MatrixXd ambient = MatrixXd::Identity(l, l);
  const auto rand_inits = random_inits(ambient, 1, 1000, InitMode::kAmbient, RngStream(10));
  double mean_sq = 0.0;
  for (const MixtureParams& omega : rand_inits)
    mean_sq += omega.thetas.row(0).squaredNorm();
  mean_sq /= 1000.0;
  const double expected = std::sqrt(static_cast<double>(l));  // L * Var = sqrt(L)
  CHECK(std::abs(mean_sq - expected) <= 0.1 * expected);
}

TEST_CASE("subspace invariants: sampled recovery angle stays moderate") {
  // Light version of the sampled consistency check (acceptance runs the
  // full-size one): K = 3, L = 20, p = N = 2e4.
  Scenario sc;
  sc.k = 3;
  sc.l = 20;
  sc.p = 20000;
  sc.n = 20000;
  sc.seed = 2024;
  const ScenarioData data = generate_scenario(sc);
  const MatrixXd gamma = estimate_gamma(data.counts, data.x);
  const SubspaceEstimate sub = top_eigenspace(gamma, 3);
  const double angle =
      largest_principal_angle(sub.v_hat, data.omega_star.thetas.transpose());
  CHECK(angle <= 0.5);
}
