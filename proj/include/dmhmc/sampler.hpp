#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dmhmc/network.hpp"
#include "dmhmc/potentials.hpp"
#include "dmhmc/tracking.hpp"

namespace dmhmc {

enum class MixingScheduleKind { constant, staircase, geometric };

struct MixingSchedule {
  MixingScheduleKind kind = MixingScheduleKind::constant;
  int param = 1;  // constant: rounds k; staircase: iterations per increase
};

/// Rounds of gossip mixing executed at iteration t.
int mixing_rounds(long t, const MixingSchedule& schedule);

enum class AcceptanceMode {
  taylor,        // Algorithm form: dH = -0.5 eps^2 (aleph + |g|^2)
  taylor_text,   // alternative closed form: dH = -aleph - eps^2 |g|^2
  second_order,  // full second-order Taylor surrogate over all shards
  exact_oracle,  // exact Hamiltonian difference over all shards
};

struct SamplerConfig {
  double epsilon = 0.01;
  long iterations = 1000;
  Eigen::MatrixXd mass;  // empty => identity
  MixingSchedule mixing_schedule;
  long mh_warmup_iters = 0;  // forced accept for the first iterations
  bool gradient_tracking = true;
  AcceptanceMode acceptance_mode = AcceptanceMode::taylor;
  bool consensus_step = true;
  std::uint64_t seed = 0;
  int thin = 1;
  bool record_dual = false;           // also record second-order and exact dH
  bool record_log_posterior = true;   // per-iteration mean log posterior

  void validate() const;
};

struct Trace {
  int m = 0;
  int d = 0;
  int thin = 1;
  std::vector<Eigen::MatrixXd> samples;       // recorded iterates, each m x d
  std::vector<std::vector<std::uint8_t>> accepts;  // per iteration, m flags
  std::map<std::string, std::vector<double>> metrics;

  long iterations() const { return static_cast<long>(accepts.size()); }
  bool has_metric(const std::string& name) const { return metrics.count(name) > 0; }
};

/// One first-order Euler step: p* = p + eps g; w* = w + eps p*.
std::pair<Eigen::VectorXd, Eigen::VectorXd> euler_update(
    const Eigen::VectorXd& omega, const Eigen::VectorXd& p, double epsilon,
    const Eigen::VectorXd& g);

double taylor_delta_h(double aleph, const Eigen::VectorXd& g, double epsilon);

/// Accept iff min(0, dH) >= log u. Equality accepts.
bool metropolis_decide(double delta_h, double u);

/// Exact Hamiltonian difference H(w,p) - H(w*,p*) over the full set of
/// shards, with U = -sum of shard log densities (prior shares sum to one
/// full prior).
double exact_delta_h(const ShardList& shards, const Eigen::VectorXd& omega,
                     const Eigen::VectorXd& p, const Eigen::VectorXd& omega_star,
                     const Eigen::VectorXd& p_star,
                     const Eigen::MatrixXd& mass = Eigen::MatrixXd());

/// Full second-order Taylor surrogate of the Hamiltonian difference,
/// evaluated with global quantities: exact on quadratic potentials.
double second_order_delta_h(const ShardList& shards, const Eigen::VectorXd& omega,
                            const Eigen::VectorXd& p, double epsilon);

Trace run_dmala(const ShardList& shards, const MixingMatrix& w,
                const SamplerConfig& config, const Eigen::MatrixXd& omega0);

/// Standard HMC on the summed potential. L = 1 uses the same Euler step as
/// D-MALA; L > 1 uses leapfrog.
Trace run_centralized_hmc(const ShardList& shards, const SamplerConfig& config,
                          const Eigen::VectorXd& omega0, int leapfrog_steps = 1);

struct UlaSchedule {
  double a = 1e-4;
  double b = 0.0;
  double gamma = 0.0;  // step eps_t = a / (b + t)^gamma; gamma = 0 is constant

  double step(long t) const;
};

Trace run_decentralized_ula(const ShardList& shards, const MixingMatrix& w,
                            const UlaSchedule& schedule, long iterations,
                            std::uint64_t seed, const Eigen::MatrixXd& omega0,
                            int thin = 1, bool record_log_posterior = true);

}  // namespace dmhmc
