#include "softmix/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <Eigen/SVD>

#include "softmix/errors.hpp"
#include "softmix/mom.hpp"
#include "softmix/subspace.hpp"

namespace softmix {

namespace {

constexpr double kErrSentinel = std::numeric_limits<double>::infinity();

// Exact solution of the square assignment problem (Hungarian method with
// potentials, O(K^3)). cost(i, j) = cost of matching row i to column j.
std::vector<int> hungarian(const MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0);  // match[j] = row assigned to column j (1-based)
  std::vector<int> way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> perm(n);
  for (int j = 1; j <= n; ++j) perm[match[j] - 1] = j - 1;
  return perm;
}

MatrixXd pairwise_sq_dist(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd cost(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      cost(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return cost;
}

}  // namespace

std::string MethodSpec::name() const {
  switch (method) {
    case Method::kMom:
      return "MoM";
    case Method::kEmMom:
      return "EM-MoM";
    case Method::kEmDrRand:
      return "EM-dr-rand-" + std::to_string(m_inits);
    case Method::kEmRand:
      return "EM-rand-" + std::to_string(m_inits);
    case Method::kEmOracle:
      return "EM-oracle";
  }
  return "?";
}

MethodSpec parse_method(const std::string& name) {
  MethodSpec spec;
  auto parse_m = [&](const std::string& prefix) {
    const std::string tail = name.substr(prefix.size());
    try {
      spec.m_inits = std::stoi(tail);
    } catch (...) {
      throw InvalidInputError("unknown method: " + name);
    }
    if (spec.m_inits < 1) throw InvalidInputError("method " + name + ": m must be >= 1");
  };
  if (name == "MoM") {
    spec.method = Method::kMom;
  } else if (name == "EM-MoM") {
    spec.method = Method::kEmMom;
  } else if (name == "EM-oracle") {
    spec.method = Method::kEmOracle;
  } else if (name.rfind("EM-dr-rand-", 0) == 0) {
    spec.method = Method::kEmDrRand;
    parse_m("EM-dr-rand-");
  } else if (name.rfind("EM-rand-", 0) == 0) {
    spec.method = Method::kEmRand;
    parse_m("EM-rand-");
  } else {
    throw InvalidInputError("unknown method: " + name);
  }
  return spec;
}

void Scenario::validate() const {
  if (k < 1 || l < 1) throw InvalidInputError("Scenario: K and L must be >= 1");
  if (p < 1 || n < 1) throw InvalidInputError("Scenario: p and N must be >= 1");
  for (const MethodSpec& m : methods) {
    const bool needs_subspace = m.method == Method::kMom || m.method == Method::kEmMom ||
                                m.method == Method::kEmDrRand;
    if (needs_subspace && k > l)
      throw InvalidInputError("Scenario: subspace methods need K <= L");
  }
  em.validate();
  if (!(b > 0.0)) throw InvalidInputError("Scenario: B must be positive");
  if (n_axis_candidates < 1) throw InvalidInputError("Scenario: need at least one axis candidate");
}

ScenarioData generate_scenario(const Scenario& sc, int replicate) {
  sc.validate();
  if (sc.k > sc.l)
    throw InvalidInputError("generate_scenario: K > L has no orthonormal parameter set");

  RngStream data = RngStream(sc.seed).child("replicate", static_cast<std::uint64_t>(replicate));

  ScenarioData out;
  RngStream xs = data.child("x-stream");
  out.x.rows.resize(sc.p, sc.l);
  for (Eigen::Index j = 0; j < sc.p; ++j)
    for (Eigen::Index c = 0; c < sc.l; ++c) out.x.rows(j, c) = xs.normal();

  RngStream ts = data.child("theta-stream");
  MatrixXd g(sc.l, sc.k);
  for (Eigen::Index r = 0; r < sc.l; ++r)
    for (Eigen::Index c = 0; c < sc.k; ++c) g(r, c) = ts.normal();
  Eigen::JacobiSVD<MatrixXd> svd(g, Eigen::ComputeThinU);
  MatrixXd basis = svd.matrixU();  // L x K, orthonormal columns
  for (Eigen::Index c = 0; c < sc.k; ++c) {
    Eigen::Index arg = 0;
    basis.col(c).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, c) < 0.0) basis.col(c) = -basis.col(c);
  }
  out.omega_star.alpha = VectorXd::Constant(sc.k, 1.0 / static_cast<double>(sc.k));
  out.omega_star.thetas = basis.transpose();

  out.counts = sample(out.x, out.omega_star, sc.n, data.child("y-stream"));
  return out;
}

double err_theta(const MatrixXd& theta_true, const MatrixXd& theta_hat,
                 std::vector<int>* perm_out) {
  if (theta_true.rows() != theta_hat.rows() || theta_true.cols() != theta_hat.cols())
    throw InvalidInputError("err_theta: shape mismatch");
  const int k = static_cast<int>(theta_true.rows());
  const MatrixXd cost = pairwise_sq_dist(theta_true, theta_hat);

  std::vector<int> best(k);
  double best_total = std::numeric_limits<double>::infinity();
  if (k <= 8) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      double total = 0.0;
      for (int i = 0; i < k; ++i) total += cost(i, perm[i]);
      if (total < best_total) {
        best_total = total;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    best = hungarian(cost);
    best_total = 0.0;
    for (int i = 0; i < k; ++i) best_total += cost(i, best[i]);
  }
  if (perm_out) *perm_out = best;
  return std::sqrt(best_total / static_cast<double>(k));
}

double err_theta(const MatrixXd& theta_true, const MatrixXd& theta_hat) {
  return err_theta(theta_true, theta_hat, nullptr);
}

double err_alpha(const VectorXd& alpha_true, const VectorXd& alpha_hat,
                 const std::vector<int>& perm) {
  if (alpha_true.size() != alpha_hat.size() ||
      perm.size() != static_cast<std::size_t>(alpha_true.size()))
    throw InvalidInputError("err_alpha: shape mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < alpha_true.size(); ++i)
    total += std::abs(alpha_true[i] - alpha_hat[perm[static_cast<std::size_t>(i)]]);
  return total;
}

namespace {

// Moment-based fit shared by MoM and EM-MoM: subspace, axis search, then
// the recovery pipeline.
MomResult mom_pipeline(const Scenario& sc, const ScenarioData& data,
                       const RngStream& data_stream) {
  const MatrixXd gamma = estimate_gamma(data.counts, data.x);
  const SubspaceEstimate sub = top_eigenspace(gamma, sc.k);
  const VectorXd axis = select_axis(data.counts, data.x, sub.v_hat, sc.k, sc.b,
                                    sc.n_axis_candidates, data_stream.child("axis"));
  return mom_fit(data.counts, data.x, sc.k, sc.b, axis);
}

EmResult best_of_inits(const Scenario& sc, const ScenarioData& data,
                       const std::vector<MixtureParams>& inits) {
  EmResult best;
  bool have = false;
  for (const MixtureParams& omega0 : inits) {
    EmResult fit = em_fit(data.counts, data.x, omega0, sc.em);
    if (!have || fit.final_loglik > best.final_loglik) {
      best = std::move(fit);
      have = true;
    }
  }
  return best;
}

}  // namespace

BenchRecord run_method(const MethodSpec& method, const Scenario& sc,
                       const ScenarioData& data, int replicate,
                       const RngStream& data_stream) {
  BenchRecord rec;
  rec.scenario_id = sc.id;
  rec.k = sc.k;
  rec.l = sc.l;
  rec.p = sc.p;
  rec.n = sc.n;
  rec.seed = sc.seed;
  rec.method = method.name();
  rec.replicate = replicate;
  rec.status = "ok";
  rec.err_theta = kErrSentinel;
  rec.err_alpha = kErrSentinel;

  const auto start = std::chrono::steady_clock::now();
  MixtureParams estimate;
  try {
    switch (method.method) {
      case Method::kMom: {
        estimate = mom_pipeline(sc, data, data_stream).omega_hat;
        break;
      }
      case Method::kEmMom: {
        const MomResult warm = mom_pipeline(sc, data, data_stream);
        EmResult fit = em_fit(data.counts, data.x, warm.omega_hat, sc.em);
        rec.iters = fit.iters_used;
        estimate = fit.omega_hat;
        break;
      }
      case Method::kEmDrRand: {
        const MatrixXd gamma = estimate_gamma(data.counts, data.x);
        const SubspaceEstimate sub = top_eigenspace(gamma, sc.k);
        EmResult fit = best_of_inits(
            sc, data,
            random_inits(sub.v_hat, sc.k, method.m_inits, InitMode::kSubspace,
                         data_stream.child("dr-init")));
        rec.iters = fit.iters_used;
        estimate = fit.omega_hat;
        break;
      }
      case Method::kEmRand: {
        const MatrixXd ambient = MatrixXd::Identity(sc.l, sc.l);
        EmResult fit = best_of_inits(
            sc, data,
            random_inits(ambient, sc.k, method.m_inits, InitMode::kAmbient,
                         data_stream.child("rand-init")));
        rec.iters = fit.iters_used;
        estimate = fit.omega_hat;
        break;
      }
      case Method::kEmOracle: {
        EmResult fit = em_fit(data.counts, data.x, data.omega_star, sc.em);
        rec.iters = fit.iters_used;
        estimate = fit.omega_hat;
        break;
      }
    }
    std::vector<int> perm;
    rec.err_theta = err_theta(data.omega_star.thetas, estimate.thetas, &perm);
    rec.err_alpha = err_alpha(data.omega_star.alpha, estimate.alpha, perm);
  } catch (const MomFailureError&) {
    rec.status = "mom-failure";
  } catch (const NumericDegeneracyError&) {
    rec.status = "degenerate";
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return rec;
}

std::vector<BenchRecord> run_benchmark(const std::vector<Scenario>& scenarios,
                                       int replicates, int threads) {
  if (replicates < 1) throw InvalidInputError("run_benchmark: replicates must be >= 1");
  for (const Scenario& sc : scenarios) sc.validate();
  threads = std::max(1, threads);

  // One work unit per (scenario, replicate); the methods inside a unit
  // share the generated dataset, exactly as a sequential run would.
  struct Unit {
    std::size_t scenario;
    int replicate;
  };
  std::vector<Unit> units;
  for (std::size_t s = 0; s < scenarios.size(); ++s)
    for (int r = 0; r < replicates; ++r) units.push_back({s, r});

  std::vector<std::vector<BenchRecord>> slots(units.size());
  std::atomic<std::size_t> cursor{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= units.size()) return;
      const Scenario& sc = scenarios[units[i].scenario];
      const int rep = units[i].replicate;
      const ScenarioData data = generate_scenario(sc, rep);
      const RngStream data_stream =
          RngStream(sc.seed).child("replicate", static_cast<std::uint64_t>(rep));
      std::vector<BenchRecord> cell;
      cell.reserve(sc.methods.size());
      for (const MethodSpec& m : sc.methods)
        cell.push_back(run_method(m, sc, data, rep, data_stream));
      slots[i] = std::move(cell);
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::vector<BenchRecord> records;
  for (std::vector<BenchRecord>& cell : slots)
    for (BenchRecord& rec : cell) records.push_back(std::move(rec));
  std::stable_sort(records.begin(), records.end(),
                   [](const BenchRecord& a, const BenchRecord& b) {
                     if (a.scenario_id != b.scenario_id) return a.scenario_id < b.scenario_id;
                     if (a.method != b.method) return a.method < b.method;
                     return a.replicate < b.replicate;
                   });
  return records;
}

namespace {

std::vector<MethodSpec> methods_from(const std::vector<std::string>& names) {
  std::vector<MethodSpec> out;
  out.reserve(names.size());
  for (const std::string& n : names) out.push_back(parse_method(n));
  return out;
}

Scenario base_scenario(std::string id, int k, int l, std::int64_t p, std::int64_t n,
                       std::uint64_t seed, const std::vector<std::string>& methods) {
  Scenario sc;
  sc.id = std::move(id);
  sc.k = k;
  sc.l = l;
  sc.p = p;
  sc.n = n;
  sc.seed = seed;
  sc.methods = methods_from(methods);
  return sc;
}

}  // namespace

BenchPreset bench_preset(const std::string& name) {
  BenchPreset preset;
  preset.name = name;
  if (name == "paper-small") {
    preset.replicates = 6;
    preset.scenarios.push_back(base_scenario(
        "paper-small", 3, 20, 2000, 5000, 20260801,
        {"MoM", "EM-MoM", "EM-dr-rand-5", "EM-rand-5", "EM-oracle"}));
  } else if (name == "figure-errors-N") {
    preset.replicates = 50;
    int idx = 0;
    for (std::int64_t n : {2000, 4000, 6000, 8000, 10000}) {
      preset.scenarios.push_back(base_scenario(
          "N-" + std::to_string(n), 3, 20, 3000, n, 314159 + idx,
          {"MoM", "EM-MoM", "EM-dr-rand-10", "EM-oracle"}));
      ++idx;
    }
  } else if (name == "figure-rand-init") {
    preset.replicates = 50;
    int idx = 0;
    for (int l : {20, 60}) {
      preset.scenarios.push_back(base_scenario(
          "L-" + std::to_string(l), 3, l, 3000, 10000, 271828 + idx,
          {"EM-dr-rand-1", "EM-dr-rand-10", "EM-rand-1", "EM-rand-10", "EM-oracle"}));
      ++idx;
    }
  } else if (name == "parametric-rate") {
    preset.replicates = 50;
    int idx = 0;
    for (std::int64_t s : {1, 3, 5, 7, 9, 12, 15}) {
      const std::int64_t pn = 1000 * s;
      preset.scenarios.push_back(base_scenario("pN-" + std::to_string(pn), 2, 50, pn, pn,
                                               161803 + idx, {"MoM", "EM-MoM", "EM-oracle"}));
      ++idx;
    }
  } else if (name == "figure-errors-full") {
    preset.replicates = 200;
    const std::vector<std::string> methods = {"MoM", "EM-MoM", "EM-dr-rand-10", "EM-oracle"};
    int idx = 0;
    for (std::int64_t n : {2000, 4000, 6000, 8000, 10000})
      preset.scenarios.push_back(
          base_scenario("N-" + std::to_string(n), 3, 50, 5000, n, 100000 + idx++, methods));
    for (std::int64_t p : {1000, 3000, 5000, 7000, 10000})
      preset.scenarios.push_back(
          base_scenario("p-" + std::to_string(p), 3, 50, p, 7000, 100000 + idx++, methods));
    for (int l : {20, 40, 60, 80, 100})
      preset.scenarios.push_back(
          base_scenario("L-" + std::to_string(l), 3, l, 7000, 10000, 100000 + idx++, methods));
    for (int k : {2, 4, 6, 8, 10})
      preset.scenarios.push_back(
          base_scenario("K-" + std::to_string(k), k, 50, 7000, 10000, 100000 + idx++, methods));
  } else {
    throw InvalidInputError("unknown preset: " + name);
  }
  return preset;
}

std::vector<std::string> bench_preset_names() {
  return {"paper-small", "figure-errors-N", "figure-rand-init", "parametric-rate",
          "figure-errors-full"};
}

}  // namespace softmix
