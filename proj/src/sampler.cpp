#include "dmhmc/sampler.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "dmhmc/diagnostics.hpp"
#include "dmhmc/rng.hpp"

namespace dmhmc {

void SamplerConfig::validate() const {
  if (epsilon <= 0.0) throw ValidationError("epsilon must be positive");
  if (iterations < 0) throw ValidationError("iterations must be >= 0");
  if (mh_warmup_iters < 0) throw ValidationError("mh_warmup_iters must be >= 0");
  if (thin < 1) throw ValidationError("thin must be >= 1");
  if (mass.size() > 0) {
    if (mass.rows() != mass.cols()) throw ValidationError("mass matrix must be square");
    Eigen::LLT<Eigen::MatrixXd> llt(mass);
    if (llt.info() != Eigen::Success) throw ValidationError("mass matrix must be SPD");
  }
  if (mixing_schedule.kind != MixingScheduleKind::geometric && mixing_schedule.param < 1)
    throw ValidationError("mixing schedule parameter must be >= 1");
}

int mixing_rounds(long t, const MixingSchedule& schedule) {
  switch (schedule.kind) {
    case MixingScheduleKind::constant:
      return schedule.param;
    case MixingScheduleKind::staircase:
      return 1 + static_cast<int>(t / schedule.param);
    case MixingScheduleKind::geometric:
      return static_cast<int>(t + 1);
  }
  return 1;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> euler_update(
    const Eigen::VectorXd& omega, const Eigen::VectorXd& p, double epsilon,
    const Eigen::VectorXd& g) {
  Eigen::VectorXd p_star = p + epsilon * g;
  Eigen::VectorXd omega_star = omega + epsilon * p_star;
  return {std::move(omega_star), std::move(p_star)};
}

double taylor_delta_h(double aleph, const Eigen::VectorXd& g, double epsilon) {
  return -0.5 * epsilon * epsilon * (aleph + g.squaredNorm());
}

bool metropolis_decide(double delta_h, double u) {
  return std::min(0.0, delta_h) >= std::log(u);
}

namespace {

struct MassOps {
  bool identity = true;
  Eigen::LLT<Eigen::MatrixXd> llt;

  explicit MassOps(const Eigen::MatrixXd& mass) {
    if (mass.size() > 0) {
      identity = mass.isIdentity(0.0);
      if (!identity) llt.compute(mass);
    }
  }

  Eigen::VectorXd draw_momentum(std::mt19937_64& eng, Eigen::Index d) const {
    Eigen::VectorXd z = standard_normal(eng, d);
    if (identity) return z;
    return llt.matrixL() * z;
  }

  double kinetic(const Eigen::VectorXd& p) const {
    if (identity) return 0.5 * p.squaredNorm();
    return 0.5 * p.dot(llt.solve(p));
  }

  Eigen::VectorXd velocity(const Eigen::VectorXd& p) const {
    if (identity) return p;
    return llt.solve(p);
  }
};

double full_log_density(const ShardList& shards, const Eigen::VectorXd& omega) {
  double s = 0.0;
  for (const auto& sh : shards) s += sh->log_density(omega);
  return s;
}

Eigen::VectorXd full_grad(const ShardList& shards, const Eigen::VectorXd& omega) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(omega.size());
  for (const auto& sh : shards) g += sh->grad(omega);
  return g;
}

Eigen::VectorXd full_hvp(const ShardList& shards, const Eigen::VectorXd& omega,
                         const Eigen::VectorXd& v) {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(omega.size());
  for (const auto& sh : shards) h += sh->hvp(omega, v);
  return h;
}

void push_metric(Trace& trace, const std::string& name, double value) {
  trace.metrics[name].push_back(value);
}

}  // namespace

double exact_delta_h(const ShardList& shards, const Eigen::VectorXd& omega,
                     const Eigen::VectorXd& p, const Eigen::VectorXd& omega_star,
                     const Eigen::VectorXd& p_star, const Eigen::MatrixXd& mass) {
  MassOps m(mass);
  const double h_current = -full_log_density(shards, omega) + m.kinetic(p);
  const double h_proposed = -full_log_density(shards, omega_star) + m.kinetic(p_star);
  return h_current - h_proposed;
}

double second_order_delta_h(const ShardList& shards, const Eigen::VectorXd& omega,
                            const Eigen::VectorXd& p, double epsilon) {
  const Eigen::VectorXd g = full_grad(shards, omega);
  const Eigen::VectorXd p_star = p + epsilon * g;
  const Eigen::VectorXd d_omega = epsilon * p_star;
  const Eigen::VectorXd d_p = epsilon * g;
  // H(w*,p*) - H(w,p) to second order at (w,p), with dH/dw = grad U = -g
  const double first = d_omega.dot(-g) + d_p.dot(p);
  const double second =
      0.5 * d_omega.dot(full_hvp(shards, omega, d_omega)) + 0.5 * d_p.squaredNorm();
  return -(first + second);
}

Trace run_dmala(const ShardList& shards, const MixingMatrix& w,
                const SamplerConfig& config, const Eigen::MatrixXd& omega0) {
  config.validate();
  const int m = static_cast<int>(shards.size());
  if (w.size() != m || omega0.rows() != m)
    throw DimensionMismatch("shards, mixing matrix and omega0 agent counts disagree");
  const Eigen::Index d = omega0.cols();
  const MassOps mass(config.mass);
  const bool needs_full_dh = config.record_dual ||
                             config.acceptance_mode == AcceptanceMode::second_order ||
                             config.acceptance_mode == AcceptanceMode::exact_oracle;

  Trace trace;
  trace.m = m;
  trace.d = static_cast<int>(d);
  trace.thin = config.thin;
  trace.samples.push_back(omega0);

  Eigen::MatrixXd omega = omega0;
  Eigen::MatrixXd momentum = Eigen::MatrixXd::Zero(m, d);
  TrackingState tracking;
  Eigen::MatrixXd g_est(m, d);
  Eigen::VectorXd aleph_est(m);

  for (long t = 0; t < config.iterations; ++t) {
    if (!omega.allFinite()) throw NonFiniteState("non-finite agent state", t);

    Eigen::MatrixXd local_grads(m, d);
    Eigen::VectorXd local_quads(m);
    for (int i = 0; i < m; ++i) {
      auto eng = substream(config.seed, RngStream::momentum, i, t);
      momentum.row(i) = mass.draw_momentum(eng, d).transpose();
      local_grads.row(i) = shards[i]->grad(omega.row(i)).transpose();
      local_quads[i] =
          momentum.row(i).dot(shards[i]->hvp(omega.row(i), momentum.row(i)));
    }

    const int rounds = mixing_rounds(t, config.mixing_schedule);
    // a single agent already holds the network average; skipping the tracking
    // recursion keeps the m = 1 chain bit-identical to centralized HMC
    if (config.gradient_tracking && m > 1) {
      if (!tracking.initialized)
        tracking = init_tracking(local_grads, local_quads);
      else
        track_update(tracking, w, rounds, local_grads, local_quads);
      g_est = tracking.g;
      aleph_est = tracking.aleph;
    } else {
      g_est = local_grads;
      aleph_est = local_quads;
    }

    int n_accept = 0;
    std::vector<std::uint8_t> flags(m, 0);
    double dh_taylor_sum = 0.0, dh_second_sum = 0.0, dh_exact_sum = 0.0;
    double gap_taylor_sum = 0.0, gap_second_sum = 0.0;
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd g_i = g_est.row(i);
      const Eigen::VectorXd p_i = momentum.row(i);
      const Eigen::VectorXd w_i = omega.row(i);
      auto [omega_star, p_star] = euler_update(w_i, p_i, config.epsilon, g_i);

      const double dh_taylor =
          config.acceptance_mode == AcceptanceMode::taylor_text
              ? -aleph_est[i] - config.epsilon * config.epsilon * g_i.squaredNorm()
              : taylor_delta_h(aleph_est[i], g_i, config.epsilon);
      double dh_second = 0.0, dh_exact = 0.0;
      if (needs_full_dh) {
        dh_second = second_order_delta_h(shards, w_i, p_i, config.epsilon);
        dh_exact = exact_delta_h(shards, w_i, p_i, omega_star, p_star, config.mass);
      }

      double dh = dh_taylor;
      if (config.acceptance_mode == AcceptanceMode::second_order) dh = dh_second;
      if (config.acceptance_mode == AcceptanceMode::exact_oracle) dh = dh_exact;

      bool accept = true;
      if (t >= config.mh_warmup_iters) {
        auto eng = substream(config.seed, RngStream::uniform, i, t);
        accept = metropolis_decide(dh, uniform_open(eng));
      }
      if (accept) {
        omega.row(i) = omega_star.transpose();
        momentum.row(i) = p_star.transpose();
        flags[i] = 1;
        ++n_accept;
      }

      if (config.record_dual) {
        dh_taylor_sum += dh_taylor;
        dh_second_sum += dh_second;
        dh_exact_sum += dh_exact;
        gap_taylor_sum += std::abs(dh_taylor - dh_exact);
        gap_second_sum += std::abs(dh_second - dh_exact);
      }
    }

    if (config.consensus_step) omega = mix(w, omega, rounds);

    trace.accepts.push_back(std::move(flags));

    push_metric(trace, "consensus_error", consensus_error(omega));
    push_metric(trace, "accept_rate", static_cast<double>(n_accept) / m);
    if (config.record_log_posterior) {
      double mlp = 0.0;
      for (int i = 0; i < m; ++i) mlp += full_log_density(shards, omega.row(i));
      push_metric(trace, "mean_log_posterior", mlp / m);
    }
    if (config.record_dual) {
      push_metric(trace, "dh_taylor", dh_taylor_sum / m);
      push_metric(trace, "dh_second", dh_second_sum / m);
      push_metric(trace, "dh_exact", dh_exact_sum / m);
      push_metric(trace, "gap_taylor_exact", gap_taylor_sum / m);
      push_metric(trace, "gap_second_exact", gap_second_sum / m);
    }

    if ((t + 1) % config.thin == 0) trace.samples.push_back(omega);
  }
  if (!omega.allFinite())
    throw NonFiniteState("non-finite agent state", config.iterations);
  return trace;
}

Trace run_centralized_hmc(const ShardList& shards, const SamplerConfig& config,
                          const Eigen::VectorXd& omega0, int leapfrog_steps) {
  config.validate();
  if (leapfrog_steps < 1) throw ValidationError("leapfrog_steps must be >= 1");
  const Eigen::Index d = omega0.size();
  const MassOps mass(config.mass);

  Trace trace;
  trace.m = 1;
  trace.d = static_cast<int>(d);
  trace.thin = config.thin;
  trace.samples.push_back(omega0.transpose());

  Eigen::VectorXd omega = omega0;
  for (long t = 0; t < config.iterations; ++t) {
    if (!omega.allFinite()) throw NonFiniteState("non-finite chain state", t);
    auto eng = substream(config.seed, RngStream::momentum, 0, t);
    const Eigen::VectorXd p = mass.draw_momentum(eng, d);

    Eigen::VectorXd omega_star, p_star;
    if (leapfrog_steps == 1) {
      std::tie(omega_star, p_star) =
          euler_update(omega, p, config.epsilon, full_grad(shards, omega));
    } else {
      omega_star = omega;
      p_star = p + 0.5 * config.epsilon * full_grad(shards, omega_star);
      for (int l = 0; l < leapfrog_steps; ++l) {
        omega_star += config.epsilon * mass.velocity(p_star);
        const double scale = (l + 1 < leapfrog_steps) ? 1.0 : 0.5;
        p_star += scale * config.epsilon * full_grad(shards, omega_star);
      }
    }

    const double dh = exact_delta_h(shards, omega, p, omega_star, p_star, config.mass);
    bool accept = true;
    if (t >= config.mh_warmup_iters) {
      auto ueng = substream(config.seed, RngStream::uniform, 0, t);
      accept = metropolis_decide(dh, uniform_open(ueng));
    }
    if (accept) omega = omega_star;

    trace.accepts.push_back({static_cast<std::uint8_t>(accept)});
    push_metric(trace, "accept_rate", accept ? 1.0 : 0.0);
    if (config.record_log_posterior)
      push_metric(trace, "mean_log_posterior", full_log_density(shards, omega));
    if ((t + 1) % config.thin == 0) trace.samples.push_back(omega.transpose());
  }
  if (!omega.allFinite())
    throw NonFiniteState("non-finite chain state", config.iterations);
  return trace;
}

double UlaSchedule::step(long t) const {
  if (gamma == 0.0) return a;
  return a / std::pow(b + static_cast<double>(t), gamma);
}

Trace run_decentralized_ula(const ShardList& shards, const MixingMatrix& w,
                            const UlaSchedule& schedule, long iterations,
                            std::uint64_t seed, const Eigen::MatrixXd& omega0,
                            int thin, bool record_log_posterior) {
  if (schedule.a <= 0 || schedule.b < 0 || schedule.gamma < 0 || schedule.gamma > 1)
    throw ValidationError("ULA schedule requires a > 0, b >= 0, gamma in [0,1]");
  const int m = static_cast<int>(shards.size());
  if (w.size() != m || omega0.rows() != m)
    throw DimensionMismatch("shards, mixing matrix and omega0 agent counts disagree");
  const Eigen::Index d = omega0.cols();

  Trace trace;
  trace.m = m;
  trace.d = static_cast<int>(d);
  trace.thin = thin;
  trace.samples.push_back(omega0);

  Eigen::MatrixXd omega = omega0;
  for (long t = 0; t < iterations; ++t) {
    if (!omega.allFinite()) throw NonFiniteState("non-finite agent state", t);
    const double eps = schedule.step(t);
    Eigen::MatrixXd next(m, d);
    for (int i = 0; i < m; ++i) {
      auto eng = substream(seed, RngStream::noise, i, t);
      const Eigen::VectorXd xi = standard_normal(eng, d);
      next.row(i) = omega.row(i) +
                    eps * shards[i]->grad(omega.row(i)).transpose() +
                    std::sqrt(2.0 * eps) * xi.transpose();
    }
    omega = mix(w, next, 1);

    trace.accepts.push_back(std::vector<std::uint8_t>(m, 1));
    push_metric(trace, "consensus_error", consensus_error(omega));
    push_metric(trace, "accept_rate", 1.0);
    if (record_log_posterior) {
      double mlp = 0.0;
      for (int i = 0; i < m; ++i) mlp += full_log_density(shards, omega.row(i));
      push_metric(trace, "mean_log_posterior", mlp / m);
    }
    if ((t + 1) % thin == 0) trace.samples.push_back(omega);
  }
  if (!omega.allFinite()) throw NonFiniteState("non-finite agent state", iterations);
  return trace;
}

}  // namespace dmhmc
