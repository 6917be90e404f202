#include "dmhmc/tracking.hpp"

namespace dmhmc {

TrackingState init_tracking(const Eigen::MatrixXd& local_grads,
                            const Eigen::VectorXd& local_quads) {
  if (local_grads.rows() != local_quads.size())
    throw DimensionMismatch("local grads/quads agent counts disagree");
  TrackingState s;
  s.g = local_grads;
  s.aleph = local_quads;
  s.prev_local_grad = local_grads;
  s.prev_local_quad = local_quads;
  s.initialized = true;
  return s;
}

void track_update(TrackingState& state, const MixingMatrix& w, int rounds,
                  const Eigen::MatrixXd& local_grads,
                  const Eigen::VectorXd& local_quads) {
  if (!state.initialized) throw Error("tracking state not initialized");
  if (local_grads.rows() != state.g.rows() || local_grads.cols() != state.g.cols() ||
      local_quads.size() != state.aleph.size())
    throw DimensionMismatch("tracking update dimensions disagree");

  state.g = mix(w, state.g + local_grads - state.prev_local_grad, rounds);
  state.aleph = mix(w, state.aleph + local_quads - state.prev_local_quad, rounds);
  state.prev_local_grad = local_grads;
  state.prev_local_quad = local_quads;
}

}  // namespace dmhmc
