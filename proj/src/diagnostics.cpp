#include "dmhmc/diagnostics.hpp"

#include <cmath>

namespace dmhmc {

double consensus_error(const Eigen::MatrixXd& stacked) {
  const Eigen::RowVectorXd mean = stacked.colwise().mean();
  return (stacked.rowwise() - mean).norm();
}

Eigen::VectorXd fd_gradient(const PotentialShard& shard,
                            const Eigen::VectorXd& omega, double h) {
  if (h <= 0) throw Error("finite-difference step must be positive");
  Eigen::VectorXd g(omega.size());
  Eigen::VectorXd probe = omega;
  for (Eigen::Index j = 0; j < omega.size(); ++j) {
    probe[j] = omega[j] + h;
    const double up = shard.log_density(probe);
    probe[j] = omega[j] - h;
    const double down = shard.log_density(probe);
    probe[j] = omega[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

Eigen::VectorXd fd_hvp(const PotentialShard& shard, const Eigen::VectorXd& omega,
                       const Eigen::VectorXd& v, double h) {
  if (h <= 0) throw Error("finite-difference step must be positive");
  // hvp of U = -(d/dt) grad log_density(omega + t v) at t = 0
  const Eigen::VectorXd gp = shard.grad(omega + h * v);
  const Eigen::VectorXd gm = shard.grad(omega - h * v);
  return -(gp - gm) / (2.0 * h);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> posterior_moments(
    const Trace& trace, double burn_in_fraction) {
  if (burn_in_fraction < 0.0 || burn_in_fraction > 1.0)
    throw Error("burn_in_fraction must lie in [0,1]");
  const long n_rec = static_cast<long>(trace.samples.size());
  const long start = static_cast<long>(burn_in_fraction * n_rec);
  if (start >= n_rec) throw EmptyAfterBurnIn("no samples left after burn-in");

  const long count = (n_rec - start) * trace.m;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(trace.d);
  for (long s = start; s < n_rec; ++s)
    mean += trace.samples[s].colwise().sum().transpose();
  mean /= static_cast<double>(count);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(trace.d, trace.d);
  for (long s = start; s < n_rec; ++s)
    for (int i = 0; i < trace.m; ++i) {
      const Eigen::VectorXd r = trace.samples[s].row(i).transpose() - mean;
      cov += r * r.transpose();
    }
  cov /= static_cast<double>(count);
  return {mean, cov};
}

MetricSeries task_metric(const Trace& trace, const ShardList& shards,
                         TaskMetricKind kind, const Eigen::MatrixXd& eval_X,
                         const Eigen::VectorXd& eval_y,
                         const PredictorFn& predictor) {
  MetricSeries series;
  const long n_rec = static_cast<long>(trace.samples.size());
  if (n_rec == 0) throw Error("empty trace");

  if (kind == TaskMetricKind::mean_log_posterior) {
    series.name = "mean_log_posterior";
    double running = 0.0;
    for (long s = 0; s < n_rec; ++s) {
      double lp = 0.0;
      for (int i = 0; i < trace.m; ++i) {
        const Eigen::VectorXd w = trace.samples[s].row(i).transpose();
        for (const auto& sh : shards) lp += sh->log_density(w);
      }
      running += lp / trace.m;
      series.values.push_back(running / static_cast<double>(s + 1));
    }
    return series;
  }

  if (!predictor) throw Error("predictor required for mse/accuracy metrics");
  if (eval_X.rows() != eval_y.size())
    throw ShapeMismatch("eval data rows must match eval targets");
  series.name = kind == TaskMetricKind::mse ? "mse" : "accuracy";

  // running parameter mean per agent; predict with it at each iteration
  Eigen::MatrixXd running_mean = Eigen::MatrixXd::Zero(trace.m, trace.d);
  for (long s = 0; s < n_rec; ++s) {
    running_mean += (trace.samples[s] - running_mean) / static_cast<double>(s + 1);
    double metric = 0.0;
    for (int i = 0; i < trace.m; ++i) {
      const Eigen::VectorXd pred = predictor(running_mean.row(i).transpose(), eval_X);
      if (pred.size() != eval_y.size())
        throw ShapeMismatch("predictor output length disagrees with eval targets");
      if (kind == TaskMetricKind::mse) {
        metric += (pred - eval_y).squaredNorm() / static_cast<double>(eval_y.size());
      } else {
        double correct = 0.0;
        for (Eigen::Index k = 0; k < pred.size(); ++k)
          if (std::lround(pred[k]) == std::lround(eval_y[k])) correct += 1.0;
        metric += correct / static_cast<double>(eval_y.size());
      }
    }
    series.values.push_back(metric / trace.m);
  }
  return series;
}

MetricSeries acceptance_gap(const Trace& trace, const std::string& variant) {
  const std::string key =
      variant == "second_order" ? "gap_second_exact" : "gap_taylor_exact";
  auto it = trace.metrics.find(key);
  if (it == trace.metrics.end())
    throw MissingDualEvaluation("run was not executed with record_dual");
  return {key, it->second};
}

}  // namespace dmhmc
