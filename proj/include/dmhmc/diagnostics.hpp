#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "dmhmc/potentials.hpp"
#include "dmhmc/sampler.hpp"

namespace dmhmc {

struct MetricSeries {
  std::string name;
  std::vector<double> values;
};

/// Frobenius norm of the deviation of the stacked agent rows from their
/// row mean.
double consensus_error(const Eigen::MatrixXd& stacked);

/// Central-difference oracles. These deliberately go through log_density /
/// grad only, never the shard's analytic counterparts of the quantity they
/// check.
Eigen::VectorXd fd_gradient(const PotentialShard& shard,
                            const Eigen::VectorXd& omega, double h = 1e-5);
/// Finite-difference Hessian-vector product of U (negative log density).
Eigen::VectorXd fd_hvp(const PotentialShard& shard, const Eigen::VectorXd& omega,
                       const Eigen::VectorXd& v, double h = 1e-5);

/// Pooled posterior mean and covariance across agents and recorded samples
/// after discarding the given burn-in fraction.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> posterior_moments(
    const Trace& trace, double burn_in_fraction);

enum class TaskMetricKind { mse, accuracy, mean_log_posterior };

/// Predictor evaluated at a single parameter vector: returns one prediction
/// per row of X (regression value, or predicted class index as a real).
using PredictorFn =
    std::function<Eigen::VectorXd(const Eigen::VectorXd& omega, const Eigen::MatrixXd& X)>;

/// Cumulative predictive performance per iteration, averaged over agents.
/// Each agent predicts with the running mean of its own samples so far.
/// For mean_log_posterior the shards are evaluated instead of the predictor.
MetricSeries task_metric(const Trace& trace, const ShardList& shards,
                         TaskMetricKind kind, const Eigen::MatrixXd& eval_X,
                         const Eigen::VectorXd& eval_y,
                         const PredictorFn& predictor = nullptr);

/// Per-iteration |dH_taylor - dH_exact| from a dual-evaluation run.
/// variant selects which surrogate: "taylor" (the algorithm form) or
/// "second_order".
MetricSeries acceptance_gap(const Trace& trace,
                            const std::string& variant = "taylor");

}  // namespace dmhmc
