#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dmhmc/config.hpp"
#include "dmhmc/diagnostics.hpp"
#include "dmhmc/trace_io.hpp"
#include "dmhmc/validate.hpp"

namespace {

using namespace dmhmc;

Trace run_experiment(const Experiment& ex) {
  if (ex.algo == "hmc")
    return run_centralized_hmc(ex.shards, ex.sampler, ex.omega0.row(0).transpose(),
                               ex.leapfrog_steps);
  if (ex.algo == "ula")
    return run_decentralized_ula(ex.shards, ex.w, ex.ula, ex.sampler.iterations,
                                 ex.sampler.seed, ex.omega0, ex.sampler.thin,
                                 ex.sampler.record_log_posterior);
  return run_dmala(ex.shards, ex.w, ex.sampler, ex.omega0);
}

void append_task_metric(Trace& trace, const Experiment& ex) {
  if (ex.test.n() == 0) return;
  PredictorFn predictor;
  TaskMetricKind kind = TaskMetricKind::mse;
  Eigen::VectorXd targets = ex.test.y;
  if (ex.model_kind == ModelKind::linreg) {
    predictor = [](const Eigen::VectorXd& w, const Eigen::MatrixXd& X) {
      return Eigen::VectorXd(X * w);
    };
  } else if (ex.model_kind == ModelKind::logreg) {
    kind = TaskMetricKind::accuracy;
    const int c = ex.n_classes;
    predictor = [c](const Eigen::VectorXd& w, const Eigen::MatrixXd& X) {
      const Eigen::MatrixXd p = logreg_predict_proba(w, X, c);
      Eigen::VectorXd out(p.rows());
      for (Eigen::Index i = 0; i < p.rows(); ++i) {
        Eigen::Index best;
        p.row(i).maxCoeff(&best);
        out[i] = static_cast<double>(best);
      }
      return out;
    };
    targets = ex.test.labels.cast<double>();
  } else if (ex.model_kind == ModelKind::mlp) {
    kind = TaskMetricKind::accuracy;
    const int c = ex.n_classes, h = ex.hidden;
    predictor = [c, h](const Eigen::VectorXd& w, const Eigen::MatrixXd& X) {
      const Eigen::MatrixXd p = mlp_predict_proba(w, X, h, c);
      Eigen::VectorXd out(p.rows());
      for (Eigen::Index i = 0; i < p.rows(); ++i) {
        Eigen::Index best;
        p.row(i).maxCoeff(&best);
        out[i] = static_cast<double>(best);
      }
      return out;
    };
    targets = ex.test.labels.cast<double>();
  } else {
    return;
  }
  auto series = task_metric(trace, ex.shards, kind, ex.test.X, targets, predictor);
  trace.metrics["task_" + series.name] = series.values;
}

int cmd_run(const std::string& config_path, const std::string& algo,
            long seed, const std::string& out, const std::string& sweep) {
  Experiment base = load_config(config_path);
  auto keys = base.keys;
  if (!algo.empty()) keys["experiment.algo"] = algo;
  if (seed >= 0) keys["sampler.seed"] = std::to_string(seed);
  if (!out.empty()) keys["output.dir"] = out;
  if (const char* env = std::getenv("DMHMC_OUT_DIR")) keys["output.dir"] = env;

  std::vector<std::string> eps_values;
  if (!sweep.empty()) {
    const std::string prefix = "epsilon=";
    if (sweep.rfind(prefix, 0) != 0)
      throw ValidationError("--sweep supports only epsilon=a,b,c");
    std::stringstream ss(sweep.substr(prefix.size()));
    std::string tok;
    while (std::getline(ss, tok, ',')) eps_values.push_back(tok);
  } else {
    eps_values.push_back("");  // single run with configured epsilon
  }

  for (const auto& eps : eps_values) {
    auto k = keys;
    std::string dir = k["output.dir"];
    if (!eps.empty()) {
      k["sampler.epsilon"] = eps;
      dir += "/eps_" + eps;
      k["output.dir"] = dir;
    }
    Experiment ex = resolve_experiment(k);
    Trace trace = run_experiment(ex);
    append_task_metric(trace, ex);
    write_trace(trace, ex.out_dir, ex.keys);
    std::cout << "wrote " << ex.out_dir << " (" << trace.samples.size()
              << " recorded samples, " << trace.iterations() << " iterations)\n";
  }
  return 0;
}

int cmd_spectral(const std::string& config_path) {
  Experiment ex = load_config(config_path);
  std::cout << "agents: " << ex.graph.m << "\n"
            << "edges:  " << ex.graph.edges.size() << "\n"
            << "beta:   " << ex.w.beta << "\n"
            << "mixing matrix:\n"
            << ex.w.weights << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized Metropolis-adjusted HMC simulator"};
  app.require_subcommand(1);

  std::string config_path, algo, out_dir, sweep;
  long seed = -1;

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config_path, "config file (.ini style or run.json)")
      ->required();
  run->add_option("--algo", algo, "override algorithm: dmala|hmc|ula");
  run->add_option("--seed", seed, "override RNG seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--sweep", sweep, "sweep, e.g. epsilon=0.01,0.005");

  auto* validate = app.add_subcommand("validate", "run oracle and invariant checks");

  std::string spectral_config;
  auto* spectral = app.add_subcommand("spectral", "print mixing matrix and spectral gap");
  spectral->add_option("--config", spectral_config, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, algo, seed, out_dir, sweep);
    if (validate->parsed()) return dmhmc::run_validation(std::cout) == 0 ? 0 : 1;
    if (spectral->parsed()) return cmd_spectral(spectral_config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
