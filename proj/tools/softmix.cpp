// Command-line front end: simulate | fit | bench | eval.
//
// Exit codes: 0 success, 1 invalid input or I/O failure, 2 structured
// method failure (a moment-based fit that could not recover parameters),
// 64 command-line usage errors.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "softmix/bench.hpp"
#include "softmix/em.hpp"
#include "softmix/errors.hpp"
#include "softmix/io.hpp"
#include "softmix/mom.hpp"
#include "softmix/subspace.hpp"

namespace {

namespace fs = std::filesystem;
using namespace softmix;

struct RunConfig {
  // [scenario]
  std::optional<int> k;
  int l = 20;
  std::int64_t p = 2000;
  std::int64_t n = 5000;
  std::uint64_t seed = 1;
  std::vector<std::string> methods = {"EM-oracle"};
  int replicates = 1;
  // [em]
  EmConfig em;
  // [mom]
  std::optional<double> b;
  // [subspace]
  int n_axis_candidates = 200;
  std::string sigma = "identity";
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Plain INI-style configuration with strict key checking: sections
// [scenario], [em], [mom], [subspace]; unknown sections or keys fail.
RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  RunConfig cfg;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      if (section != "scenario" && section != "em" && section != "mom" &&
          section != "subspace")
        throw InvalidInputError(path + ":" + std::to_string(line_no) +
                                ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInputError(path + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto bad_key = [&]() -> InvalidInputError {
      return InvalidInputError(path + ":" + std::to_string(line_no) + ": unknown key '" +
                               key + "' in section [" + section + "]");
    };
    try {
      if (section == "scenario") {
        if (key == "k") cfg.k = std::stoi(value);
        else if (key == "l") cfg.l = std::stoi(value);
        else if (key == "p") cfg.p = std::stoll(value);
        else if (key == "n") cfg.n = std::stoll(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "methods") cfg.methods = split_list(value);
        else if (key == "replicates") cfg.replicates = std::stoi(value);
        else throw bad_key();
      } else if (section == "em") {
        if (key == "step_size") cfg.em.step_size = parse_double(value);
        else if (key == "max_iters") cfg.em.max_iters = std::stoi(value);
        else if (key == "rel_tol") cfg.em.rel_tol = parse_double(value);
        else throw bad_key();
      } else if (section == "mom") {
        if (key == "b") cfg.b = parse_double(value);
        else throw bad_key();
      } else if (section == "subspace") {
        if (key == "n_axis_candidates") cfg.n_axis_candidates = std::stoi(value);
        else if (key == "sigma") cfg.sigma = value;
        else throw bad_key();
      } else {
        throw InvalidInputError(path + ":" + std::to_string(line_no) +
                                ": key outside any section");
      }
    } catch (const std::invalid_argument&) {
      throw InvalidInputError(path + ":" + std::to_string(line_no) + ": bad value for " + key);
    } catch (const std::out_of_range&) {
      throw InvalidInputError(path + ":" + std::to_string(line_no) + ": value out of range");
    }
  }
  return cfg;
}

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("SOFTMIX_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

Scenario scenario_from_config(const RunConfig& cfg) {
  Scenario sc;
  sc.id = "config";
  sc.k = cfg.k.value_or(3);
  sc.l = cfg.l;
  sc.p = cfg.p;
  sc.n = cfg.n;
  sc.seed = cfg.seed;
  sc.em = cfg.em;
  sc.b = cfg.b.value_or(1.0);
  sc.n_axis_candidates = cfg.n_axis_candidates;
  for (const std::string& m : cfg.methods) sc.methods.push_back(parse_method(m));
  return sc;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
  Scenario sc = scenario_from_config(cfg);
  sc.methods.clear();
  const ScenarioData data = generate_scenario(sc);
  fs::create_directories(out_dir);
  write_features_csv(out_dir + "/features.csv", data.x);
  write_params_csv(out_dir + "/truth.params", data.omega_star);
  write_counts_csv(out_dir + "/counts.csv", data.counts);
  std::cout << "wrote features.csv truth.params counts.csv to " << out_dir << "\n";
  return 0;
}

MatrixXd subspace_sigma(const RunConfig& cfg, const FeatureMatrix& x) {
  if (cfg.sigma == "identity")
    return MatrixXd::Identity(x.dim(), x.dim());
  if (cfg.sigma == "sample")
    return x.rows.transpose() * x.rows / static_cast<double>(x.p());
  // otherwise: path to an L x L matrix stored like features.csv
  return read_features_csv(cfg.sigma).rows;
}

int cmd_fit(const RunConfig& cfg, const std::string& method_name,
            const std::string& out_dir, std::uint64_t seed) {
  const MethodSpec method = parse_method(method_name);
  const FeatureMatrix x = read_features_csv(out_dir + "/features.csv");
  const SampleCounts counts = read_counts_csv(out_dir + "/counts.csv");

  const std::string truth_path = out_dir + "/truth.params";
  std::optional<MixtureParams> truth;
  if (fs::exists(truth_path)) truth = read_params_csv(truth_path);

  int k = cfg.k.value_or(0);
  if (k == 0 && truth) k = static_cast<int>(truth->k());
  if (k == 0)
    throw InvalidInputError("fit: K unknown; provide [scenario] k or a truth.params file");

  const bool needs_b = method.method == Method::kMom || method.method == Method::kEmMom;
  if (needs_b && !cfg.b)
    throw InvalidInputError("fit: moment methods need an explicit bound; set [mom] b");
  const double b = cfg.b.value_or(1.0);

  RngStream stream = RngStream(seed).child("fit");
  MixtureParams estimate;
  MomDiagnostics diag;
  EmResult em_result;
  bool have_trace = false;

  auto run_mom = [&]() -> MomResult {
    const MatrixXd sigma = subspace_sigma(cfg, x);
    const MatrixXd gamma = estimate_gamma(counts, x, sigma);
    const SubspaceEstimate sub = top_eigenspace(gamma, k);
    const VectorXd axis = select_axis(counts, x, sub.v_hat, k, b,
                                      cfg.n_axis_candidates, stream.child("axis"));
    return mom_fit(counts, x, k, b, axis);
  };

  EmConfig em_cfg = cfg.em;
  em_cfg.track_trace = true;

  try {
    switch (method.method) {
      case Method::kMom: {
        const MomResult r = run_mom();
        estimate = r.omega_hat;
        diag = r.diagnostics;
        break;
      }
      case Method::kEmMom: {
        const MomResult r = run_mom();
        diag = r.diagnostics;
        em_result = em_fit(counts, x, r.omega_hat, em_cfg);
        estimate = em_result.omega_hat;
        have_trace = true;
        break;
      }
      case Method::kEmDrRand:
      case Method::kEmRand: {
        std::vector<MixtureParams> inits;
        if (method.method == Method::kEmDrRand) {
          const MatrixXd gamma = estimate_gamma(counts, x, subspace_sigma(cfg, x));
          const SubspaceEstimate sub = top_eigenspace(gamma, k);
          inits = random_inits(sub.v_hat, k, method.m_inits, InitMode::kSubspace,
                               stream.child("dr-init"));
        } else {
          inits = random_inits(MatrixXd::Identity(x.dim(), x.dim()), k, method.m_inits,
                               InitMode::kAmbient, stream.child("rand-init"));
        }
        bool have = false;
        for (const MixtureParams& omega0 : inits) {
          EmResult fit = em_fit(counts, x, omega0, em_cfg);
          if (!have || fit.final_loglik > em_result.final_loglik) {
            em_result = std::move(fit);
            have = true;
          }
        }
        estimate = em_result.omega_hat;
        have_trace = true;
        break;
      }
      case Method::kEmOracle: {
        if (!truth)
          throw InvalidInputError("fit: EM-oracle needs truth.params in the workspace");
        em_result = em_fit(counts, x, *truth, em_cfg);
        estimate = em_result.omega_hat;
        have_trace = true;
        break;
      }
    }
  } catch (const MomFailureError& e) {
    write_diag_csv(out_dir + "/diag.csv", std::string("mom-failure:") + e.stage(), diag);
    std::cerr << "method failure: " << e.what() << "\n";
    return 2;
  }

  write_params_csv(out_dir + "/est.params", estimate);
  if (have_trace) write_trace_csv(out_dir + "/trace.csv", em_result);
  write_diag_csv(out_dir + "/diag.csv", "ok", diag);

  if (truth) {
    std::vector<int> perm;
    const double et = err_theta(truth->thetas, estimate.thetas, &perm);
    const double ea = err_alpha(truth->alpha, estimate.alpha, perm);
    std::cout << "err_theta=" << format_double(et) << " err_alpha=" << format_double(ea)
              << "\n";
  } else {
    std::cout << "loglik=" << format_double(log_likelihood(counts, x, estimate)) << "\n";
  }
  return 0;
}

int cmd_bench(const RunConfig* cfg, const std::string& preset_name,
              const std::string& out_dir, int threads, bool with_timing) {
  std::vector<Scenario> scenarios;
  int replicates = 1;
  if (!preset_name.empty()) {
    const BenchPreset preset = bench_preset(preset_name);
    scenarios = preset.scenarios;
    replicates = preset.replicates;
  } else if (cfg) {
    scenarios.push_back(scenario_from_config(*cfg));
    replicates = cfg->replicates;
  } else {
    throw InvalidInputError("bench: provide --preset or --config");
  }
  const std::vector<BenchRecord> records =
      run_benchmark(scenarios, replicates, resolve_threads(threads));
  fs::create_directories(out_dir);
  write_results_csv(out_dir + "/results.csv", records, with_timing);
  std::cout << "wrote " << records.size() << " records to " << out_dir << "/results.csv\n";
  return 0;
}

int cmd_eval(const std::string& truth_path, const std::string& est_path) {
  const MixtureParams truth = read_params_csv(truth_path);
  const MixtureParams est = read_params_csv(est_path);
  std::vector<int> perm;
  const double et = err_theta(truth.thetas, est.thetas, &perm);
  const double ea = err_alpha(truth.alpha, est.alpha, perm);
  std::cout << "err_theta=" << format_double(et) << " err_alpha=" << format_double(ea) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"softmix: softmax mixture estimation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", method_name, preset_name;
  std::string truth_path, est_path;
  std::uint64_t seed = 1;
  bool seed_given = false;
  int threads = 0;
  bool with_timing = false;

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("--config", config_path, "configuration file");
  sim->add_option("--seed", seed, "generator seed")->each([&](const std::string&) {
    seed_given = true;
  });
  sim->add_option("--out", out_dir, "output directory");

  CLI::App* fit = app.add_subcommand("fit", "estimate parameters from a dataset");
  fit->add_option("--config", config_path, "configuration file");
  fit->add_option("--method", method_name, "MoM | EM-MoM | EM-dr-rand-m | EM-rand-m | EM-oracle")
      ->required();
  fit->add_option("--seed", seed, "stream seed for axis draws and initializations");
  fit->add_option("--out", out_dir, "workspace directory (features.csv, counts.csv, ...)");

  CLI::App* bench = app.add_subcommand("bench", "run a benchmark grid");
  bench->add_option("--config", config_path, "configuration file");
  bench->add_option("--preset", preset_name, "named grid: paper-small, figure-errors-N, ...");
  bench->add_option("--threads", threads, "worker threads (default: SOFTMIX_THREADS or cores)");
  bench->add_option("--out", out_dir, "output directory");
  bench->add_flag("--timing", with_timing, "record wall-clock times (breaks byte determinism)");

  CLI::App* eval = app.add_subcommand("eval", "compare two parameter files");
  eval->add_option("truth", truth_path, "reference parameter file")->required();
  eval->add_option("est", est_path, "estimated parameter file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }

  try {
    std::optional<RunConfig> cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (!cfg) cfg = RunConfig{};
    if (seed_given) cfg->seed = seed;

    if (app.got_subcommand(sim)) return cmd_simulate(*cfg, out_dir);
    if (app.got_subcommand(fit)) return cmd_fit(*cfg, method_name, out_dir, seed);
    if (app.got_subcommand(bench))
      return cmd_bench(config_path.empty() ? nullptr : &*cfg, preset_name, out_dir, threads,
                       with_timing);
    if (app.got_subcommand(eval)) return cmd_eval(truth_path, est_path);
  } catch (const MomFailureError& e) {
    std::cerr << "method failure: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
