#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softmix/em.hpp"
#include "softmix/model.hpp"

namespace softmix {

enum class Method { kMom, kEmMom, kEmDrRand, kEmRand, kEmOracle };

// A method plus its initialization count; name() renders the benchmark
// label ("MoM", "EM-MoM", "EM-dr-rand-10", "EM-rand-10", "EM-oracle").
struct MethodSpec {
  Method method = Method::kEmOracle;
  int m_inits = 1;

  std::string name() const;
};

MethodSpec parse_method(const std::string& name);

struct Scenario {
  std::string id;
  int k = 3;
  int l = 20;
  std::int64_t p = 2000;
  std::int64_t n = 5000;
  std::uint64_t seed = 1;
  std::vector<MethodSpec> methods;
  EmConfig em;
  double b = 1.0;
  int n_axis_candidates = 200;

  void validate() const;
};

struct BenchRecord {
  std::string scenario_id;
  int k = 0;
  int l = 0;
  std::int64_t p = 0;
  std::int64_t n = 0;
  std::uint64_t seed = 0;
  std::string method;
  int replicate = 0;
  double err_theta = 0.0;
  double err_alpha = 0.0;
  int iters = 0;
  double wall_ms = 0.0;
  std::string status;  // ok | mom-failure | degenerate
};

struct ScenarioData {
  FeatureMatrix x;
  MixtureParams omega_star;
  SampleCounts counts;
};

// Draws one dataset: features iid standard normal, component parameters
// the K left singular vectors of a Gaussian L x K matrix (orthonormal,
// canonical signs), uniform weights, then N categorical samples. All
// randomness comes from labeled substreams of (seed, replicate).
ScenarioData generate_scenario(const Scenario& sc, int replicate = 0);

// Root-mean-square component error under the best matching permutation;
// exhaustive search for K <= 8, optimal assignment above.
double err_theta(const MatrixXd& theta_true, const MatrixXd& theta_hat);
double err_theta(const MatrixXd& theta_true, const MatrixXd& theta_hat,
                 std::vector<int>* perm_out);

// l1 weight error under the permutation chosen by err_theta (not
// re-optimized for the weights).
double err_alpha(const VectorXd& alpha_true, const VectorXd& alpha_hat,
                 const std::vector<int>& perm);

// Executes one estimation method on prepared scenario data. Moment-method
// failures and degenerate fits become status rows, never exceptions.
BenchRecord run_method(const MethodSpec& method, const Scenario& sc,
                       const ScenarioData& data, int replicate,
                       const RngStream& data_stream);

// All (scenario x replicate x method) cells on a small thread pool.
// Records come back in canonical (scenario_id, method, replicate) order
// and are bitwise independent of the thread count.
std::vector<BenchRecord> run_benchmark(const std::vector<Scenario>& scenarios,
                                       int replicates, int threads);

struct BenchPreset {
  std::string name;
  std::vector<Scenario> scenarios;
  int replicates = 1;
};

// Named experiment grids: "paper-small", "figure-errors-N",
// "figure-rand-init", "parametric-rate", "figure-errors-full".
BenchPreset bench_preset(const std::string& name);

std::vector<std::string> bench_preset_names();

}  // namespace softmix
