#pragma once

#include <Eigen/Dense>

#include "dmhmc/network.hpp"

namespace dmhmc {

/// Per-agent running estimates of the global average gradient (rows of g)
/// and the global quadratic term (aleph), maintained by gossip-mixed
/// difference tracking. Double stochasticity of W conserves the column means
/// of g and the mean of aleph at every update.
struct TrackingState {
  Eigen::MatrixXd g;            // m x d
  Eigen::VectorXd aleph;        // m
  Eigen::MatrixXd prev_local_grad;
  Eigen::VectorXd prev_local_quad;
  bool initialized = false;
};

TrackingState init_tracking(const Eigen::MatrixXd& local_grads,
                            const Eigen::VectorXd& local_quads);

/// g <- W^rounds (g + local - prev_local), same for aleph; prev_* updated to
/// the supplied locals.
void track_update(TrackingState& state, const MixingMatrix& w, int rounds,
                  const Eigen::MatrixXd& local_grads,
                  const Eigen::VectorXd& local_quads);

}  // namespace dmhmc
