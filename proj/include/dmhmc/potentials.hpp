#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "dmhmc/errors.hpp"

namespace dmhmc {

/// One agent's additive piece of the global log-posterior. The sign
/// conventions are fixed across the project:
///   log_density  = local log-likelihood + this agent's share of the log-prior
///   grad         = gradient of log_density (i.e. -grad U_i)
///   hvp(w, v)    = Hessian of the NEGATIVE log density times v, i.e.
///                  (d^2 U_i / d w^2) v
class PotentialShard {
 public:
  virtual ~PotentialShard() = default;
  virtual int dim() const = 0;
  virtual double log_density(const Eigen::VectorXd& omega) const = 0;
  virtual Eigen::VectorXd grad(const Eigen::VectorXd& omega) const = 0;
  virtual Eigen::VectorXd hvp(const Eigen::VectorXd& omega,
                              const Eigen::VectorXd& v) const = 0;
};

using ShardPtr = std::shared_ptr<const PotentialShard>;
using ShardList = std::vector<ShardPtr>;

/// Quadratic potential: log_density = -(scale/2)(w-mu)' P (w-mu). Zero third
/// derivative, so the second-order acceptance surrogate is exact on it.
ShardPtr gaussian_shard(const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& precision, double scale = 1.0);

/// Two-parameter Gaussian mixture target: theta = (t1, t2), data drawn from
/// (1/2)N(t1, sx2) + (1/2)N(t1+t2, sx2) with independent N(0, s12), N(0, s22)
/// priors on t1, t2.
ShardPtr gmm_shard(const std::vector<double>& data, double sigma1_sq,
                   double sigma2_sq, double sigmax_sq, double prior_share);

ShardPtr linreg_shard(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      double noise_precision, double prior_precision,
                      double prior_share);

/// Multiclass softmax likelihood with Gaussian prior share. omega is the
/// row-major flattening of the (n_classes x n_features) weight matrix.
ShardPtr logreg_shard(const Eigen::MatrixXd& X, const Eigen::VectorXi& labels,
                      int n_classes, double prior_precision, double prior_share);

/// Single-hidden-layer tanh MLP with softmax output and Gaussian prior share.
/// hvp is formed by central differences of the exact backprop gradient.
ShardPtr mlp_shard(const Eigen::MatrixXd& X, const Eigen::VectorXi& labels,
                   int hidden, int n_classes, double prior_precision,
                   double prior_share);

int mlp_param_count(int n_features, int hidden, int n_classes);

/// Softmax class probabilities of an mlp_shard-compatible parameter vector,
/// one row per sample. Used by predictive metrics.
Eigen::MatrixXd mlp_predict_proba(const Eigen::VectorXd& omega,
                                  const Eigen::MatrixXd& X, int hidden,
                                  int n_classes);
Eigen::MatrixXd logreg_predict_proba(const Eigen::VectorXd& omega,
                                     const Eigen::MatrixXd& X, int n_classes);

}  // namespace dmhmc
