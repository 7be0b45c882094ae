#include <doctest.h>

#include <cmath>

#include "softmix/em.hpp"
#include "softmix/errors.hpp"
#include "softmix/model.hpp"
#include "test_util.hpp"

using namespace softmix;
using namespace softmix::testutil;

namespace {

FeatureMatrix make_features(std::initializer_list<std::initializer_list<double>> rows) {
  FeatureMatrix x;
  const Eigen::Index p = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index l = static_cast<Eigen::Index>(rows.begin()->size());
  x.rows.resize(p, l);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) x.rows(i, j++) = v;
    ++i;
  }
  return x;
}

VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("softmax_component: identical rows force uniform") {
  const FeatureMatrix x = make_features({{0.0}, {0.0}});
  const VectorXd a = softmax_component(x, vec({5.0}));
  CHECK(a[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("softmax_component: zero parameter gives uniform") {
  const FeatureMatrix x = random_features(7, 3, RngStream(11));
  const VectorXd a = softmax_component(x, VectorXd::Zero(3));
  for (Eigen::Index j = 0; j < 7; ++j) CHECK(a[j] == doctest::Approx(1.0 / 7).epsilon(1e-13));
}

TEST_CASE("softmax_component: hand evaluation at theta = ln 3") {
  const FeatureMatrix x = make_features({{1.0}, {0.0}});
  const VectorXd a = softmax_component(x, vec({std::log(3.0)}));
  CHECK(a[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("softmax_component: non-finite theta rejected") {
  const FeatureMatrix x = make_features({{1.0}, {0.0}});
  CHECK_THROWS_AS(softmax_component(x, vec({std::nan("")})), InvalidInputError);
}

TEST_CASE("softmax_component: normalization and overflow robustness") {
  RngStream rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    const FeatureMatrix x = random_features(15, 4, rng.child("x", rep));
    VectorXd theta = rng.child("t", rep).normal_vector(4);
    // scale so the largest |x_j' theta| is 500
    theta *= 500.0 / (x.rows * theta).cwiseAbs().maxCoeff();
    const VectorXd a = softmax_component(x, theta);
    CHECK(a.allFinite());
    CHECK(std::abs(a.sum() - 1.0) <= 1e-12);
    CHECK(a.minCoeff() >= 0.0);
  }
}

TEST_CASE("softmax_component: shift invariance") {
  RngStream rng(7);
  const FeatureMatrix x = random_features(9, 3, rng.child("x"));
  const VectorXd theta = rng.child("t").normal_vector(3);
  const VectorXd u = rng.child("u").normal_vector(3);
  FeatureMatrix shifted = x;
  shifted.rows.rowwise() += u.transpose();
  const VectorXd a = softmax_component(x, theta);
  const VectorXd b = softmax_component(shifted, theta);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("mixture_pmf: K = 1 equals the single component") {
  RngStream rng(3);
  const FeatureMatrix x = random_features(8, 2, rng.child("x"));
  MixtureParams omega;
  omega.alpha = vec({1.0});
  omega.thetas = rng.child("t").normal_vector(2).transpose();
  const VectorXd pmf = mixture_pmf(x, omega);
  const VectorXd a = softmax_component(x, omega.thetas.row(0).transpose());
  CHECK((pmf - a).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("mixture_pmf: coincident atoms collapse") {
  RngStream rng(4);
  const FeatureMatrix x = random_features(6, 2, rng.child("x"));
  const VectorXd theta = rng.child("t").normal_vector(2);
  MixtureParams omega;
  omega.alpha = vec({0.5, 0.5});
  omega.thetas.resize(2, 2);
  omega.thetas.row(0) = theta.transpose();
  omega.thetas.row(1) = theta.transpose();
  const VectorXd pmf = mixture_pmf(x, omega);
  const VectorXd a = softmax_component(x, theta);
  CHECK((pmf - a).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("mixture_pmf: degenerate weight ignores the dead component") {
  RngStream rng(5);
  const FeatureMatrix x = random_features(6, 2, rng.child("x"));
  MixtureParams omega;
  omega.alpha = vec({1.0, 0.0});
  omega.thetas.resize(2, 2);
  omega.thetas.row(0) = rng.child("a").normal_vector(2).transpose();
  omega.thetas.row(1) = rng.child("b").normal_vector(2).transpose();
  const VectorXd pmf = mixture_pmf(x, omega);
  const VectorXd a = softmax_component(x, omega.thetas.row(0).transpose());
  CHECK((pmf - a).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("mixture_pmf: dimension mismatch rejected") {
  const FeatureMatrix x = make_features({{1.0, 0.0}, {0.0, 1.0}});
  MixtureParams omega;
  omega.alpha = vec({1.0});
  omega.thetas = MatrixXd::Zero(1, 3);
  CHECK_THROWS_AS(mixture_pmf(x, omega), InvalidInputError);
}

TEST_CASE("sample: near-degenerate pmf places all mass on one point") {
  FeatureMatrix x = make_features({{700.0}, {0.0}});
  MixtureParams omega;
  omega.alpha = vec({1.0});
  omega.thetas = MatrixXd::Constant(1, 1, 1.0);
  const SampleCounts counts = sample(x, omega, 1000, RngStream(1));
  CHECK(counts.freq[0] == 1.0);
  CHECK(counts.freq[1] == 0.0);
}

TEST_CASE("sample: binomial standard-error bound at n = 1e6") {
  const Eigen::Index p = 10;
  FeatureMatrix x;
  x.rows = MatrixXd::Zero(p, 2);  // identical rows -> uniform pmf
  MixtureParams omega;
  omega.alpha = vec({1.0});
  omega.thetas = MatrixXd::Constant(1, 2, 0.3);
  const std::int64_t n = 1000000;
  const SampleCounts counts = sample(x, omega, n, RngStream(99));
  const double pj = 1.0 / static_cast<double>(p);
  const double bound = 5.0 * std::sqrt(pj * (1.0 - pj) / static_cast<double>(n));
  for (Eigen::Index j = 0; j < p; ++j) CHECK(std::abs(counts.freq[j] - pj) <= bound);
}

TEST_CASE("sample: deterministic given seed, n = 0 rejected") {
  RngStream rng(12);
  const FeatureMatrix x = random_features(20, 3, rng.child("x"));
  const MixtureParams omega = random_params(2, 3, rng.child("w"));
  const SampleCounts a = sample(x, omega, 5000, RngStream(77));
  const SampleCounts b = sample(x, omega, 5000, RngStream(77));
  CHECK((a.freq.array() == b.freq.array()).all());  // bitwise
  CHECK_THROWS_AS(sample(x, omega, 0, RngStream(1)), InvalidInputError);
}

TEST_CASE("log_likelihood: hand value and relabeling invariance") {
  const FeatureMatrix x = make_features({{1.0}, {0.0}});
  MixtureParams omega;
  omega.alpha = vec({1.0});
  omega.thetas = MatrixXd::Zero(1, 1);  // uniform pmf (0.5, 0.5)
  SampleCounts counts;
  counts.freq = vec({1.0, 0.0});
  counts.n_samples = 10;
  CHECK(log_likelihood(counts, x, omega) == doctest::Approx(std::log(0.5)).epsilon(1e-14));

  // permuting support points together with frequencies changes nothing
  RngStream rng(8);
  const FeatureMatrix xr = random_features(6, 2, rng.child("x"));
  const MixtureParams w = random_params(2, 2, rng.child("w"));
  SampleCounts c = random_counts(6, rng.child("c"));
  FeatureMatrix xp = xr;
  SampleCounts cp = c;
  std::vector<int> perm = {3, 1, 5, 0, 2, 4};
  for (int j = 0; j < 6; ++j) {
    xp.rows.row(j) = xr.rows.row(perm[j]);
    cp.freq[j] = c.freq[perm[j]];
  }
  CHECK(log_likelihood(c, xr, w) ==
        doctest::Approx(log_likelihood(cp, xp, w)).epsilon(1e-13));
}

TEST_CASE("log_likelihood: maximized at the generating distribution (grid oracle)") {
  // freq equals the pmf of omega; any other parameter on a coarse grid
  // cannot beat it (Gibbs inequality).
  const FeatureMatrix x = make_features({{1.0}, {0.4}, {-0.7}, {0.0}});
  MixtureParams omega;
  omega.alpha = vec({1.0});
  omega.thetas = MatrixXd::Constant(1, 1, 0.8);
  SampleCounts counts;
  counts.freq = mixture_pmf(x, omega);
  counts.population = true;
  const double best = log_likelihood(counts, x, omega);
  for (double t = -2.0; t <= 2.0; t += 0.05) {
    MixtureParams other = omega;
    other.thetas(0, 0) = t;
    CHECK(log_likelihood(counts, x, other) <= best + 1e-12);
  }
}

TEST_CASE("responsibilities: symmetry, degenerate weight, direct quotient") {
  RngStream rng(21);
  const FeatureMatrix x = random_features(5, 2, rng.child("x"));

  MixtureParams equal;
  equal.alpha = vec({0.5, 0.5});
  const VectorXd t = rng.child("t").normal_vector(2);
  equal.thetas.resize(2, 2);
  equal.thetas.row(0) = t.transpose();
  equal.thetas.row(1) = t.transpose();
  const MatrixXd g = responsibilities(x, equal);
  CHECK((g.array() - 0.5).abs().maxCoeff() <= 1e-13);

  MixtureParams dead;
  dead.alpha = vec({1.0, 0.0});
  dead.thetas = equal.thetas;
  dead.thetas.row(1) = rng.child("u").normal_vector(2).transpose();
  const MatrixXd gd = responsibilities(x, dead);
  CHECK((gd.row(0).array() - 1.0).abs().maxCoeff() <= 1e-13);
  CHECK(gd.row(1).cwiseAbs().maxCoeff() <= 1e-290);

  // direct quotient of component pmfs on a small instance
  const FeatureMatrix x4 = random_features(4, 2, rng.child("x4"));
  const MixtureParams w = random_params(2, 2, rng.child("w"));
  const MatrixXd gq = responsibilities(x4, w);
  const VectorXd a0 = softmax_component(x4, w.thetas.row(0).transpose());
  const VectorXd a1 = softmax_component(x4, w.thetas.row(1).transpose());
  for (Eigen::Index j = 0; j < 4; ++j) {
    const double pi = w.alpha[0] * a0[j] + w.alpha[1] * a1[j];
    CHECK(gq(0, j) == doctest::Approx(w.alpha[0] * a0[j] / pi).epsilon(1e-12));
    CHECK(gq(1, j) == doctest::Approx(w.alpha[1] * a1[j] / pi).epsilon(1e-12));
  }
}

TEST_CASE("responsibilities: columns sum to one, K = 1 identically one") {
  RngStream rng(31);
  const FeatureMatrix x = random_features(11, 3, rng.child("x"));
  const MixtureParams w = random_params(3, 3, rng.child("w"));
  const MatrixXd g = responsibilities(x, w);
  for (Eigen::Index j = 0; j < x.p(); ++j)
    CHECK(std::abs(g.col(j).sum() - 1.0) <= 1e-12);

  const MixtureParams single = random_params(1, 3, rng.child("s"));
  const MatrixXd g1 = responsibilities(x, single);
  CHECK((g1.array() - 1.0).abs().maxCoeff() <= 1e-13);
}

TEST_CASE("param_distance: identity, hand value, max semantics") {
  RngStream rng(13);
  const MixtureParams w = random_params(2, 3, rng.child("w"));
  CHECK(param_distance(w, w, 1.0, 0.2) == 0.0);

  MixtureParams shifted = w;
  shifted.alpha[0] += 0.1;
  shifted.alpha[1] -= 0.1;
  CHECK(param_distance(shifted, w, 1.0, 0.2) == doctest::Approx(0.5).epsilon(1e-13));

  MixtureParams both = shifted;
  both.thetas.row(0) += VectorXd::Constant(3, 2.0).transpose();
  const double theta_term = (both.thetas - w.thetas).rowwise().norm().maxCoeff();
  CHECK(param_distance(both, w, 1.0, 0.2) ==
        doctest::Approx(std::max(theta_term, 0.5)).epsilon(1e-13));

  CHECK_THROWS_AS(param_distance(w, w, -1.0, 0.2), InvalidInputError);
  CHECK_THROWS_AS(param_distance(w, w, 1.0, 0.0), InvalidInputError);
}
