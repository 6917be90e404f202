#include "dmhmc/validate.hpp"

#include <iostream>
#include <random>

#include "dmhmc/datasets.hpp"
#include "dmhmc/diagnostics.hpp"
#include "dmhmc/network.hpp"
#include "dmhmc/potentials.hpp"
#include "dmhmc/tracking.hpp"

namespace dmhmc {

namespace {

Graph random_connected_graph(int m, std::mt19937_64& eng) {
  Graph g;
  g.m = m;
  // random spanning tree plus extra edges
  for (int i = 1; i < m; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    g.add_edge(i, pick(eng));
  }
  std::uniform_int_distribution<int> node(0, m - 1);
  for (int k = 0; k < m; ++k) {
    int a = node(eng), b = node(eng);
    if (a != b) g.add_edge(a, b);
  }
  return g;
}

bool mixing_invariants_hold(const MixingMatrix& w, const Graph& g) {
  const int m = w.size();
  const auto& mat = w.weights;
  if (!mat.isApprox(mat.transpose(), 1e-12)) return false;
  if ((mat.array() < -1e-12).any()) return false;
  for (int i = 0; i < m; ++i) {
    if (std::abs(mat.row(i).sum() - 1.0) > 1e-10) return false;
    if (std::abs(mat.col(i).sum() - 1.0) > 1e-10) return false;
    for (int j = 0; j < m; ++j)
      if (i != j && mat(i, j) > 1e-12 && !g.has_edge(i, j)) return false;
  }
  return w.beta < 1.0;
}

double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  return (got - want).norm() / std::max(1e-12, want.norm());
}

struct Check {
  std::ostream& out;
  int failures = 0;

  void report(const std::string& name, bool ok) {
    out << (ok ? "[ ok ] " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  }
};

}  // namespace

int run_validation(std::ostream& out) {
  Check check{out};
  std::mt19937_64 eng(42);
  std::normal_distribution<double> normal(0.0, 1.0);

  // mixing-matrix invariants over random connected graphs
  {
    bool ok = true;
    std::uniform_int_distribution<int> msize(2, 12);
    for (int trial = 0; trial < 40 && ok; ++trial) {
      Graph g = random_connected_graph(msize(eng), eng);
      for (auto scheme : {MixingScheme::lazy_uniform,
                          MixingScheme::metropolis_hastings_weights}) {
        auto w = build_mixing_matrix(g, scheme);
        ok = ok && mixing_invariants_hold(w, g);
      }
      if (g.complete()) {
        auto w = build_mixing_matrix(g, MixingScheme::uniform_complete);
        ok = ok && mixing_invariants_hold(w, g);
      }
    }
    check.report("mixing matrix invariants (random graphs, all schemes)", ok);
  }

  // tracking mean conservation
  {
    bool ok = true;
    Graph g = Graph::ring(6);
    auto w = build_mixing_matrix(g, MixingScheme::lazy_uniform);
    const int m = 6, d = 4;
    auto rand_mat = [&](int r, int c) {
      Eigen::MatrixXd x(r, c);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) x(i, j) = normal(eng);
      return x;
    };
    Eigen::MatrixXd grads = rand_mat(m, d);
    Eigen::VectorXd quads = rand_mat(m, 1);
    auto state = init_tracking(grads, quads);
    for (int t = 0; t < 200 && ok; ++t) {
      grads = rand_mat(m, d);
      quads = rand_mat(m, 1);
      track_update(state, w, 1 + t % 3, grads, quads);
      ok = ok && (state.g.colwise().mean() - grads.colwise().mean()).norm() < 1e-10 &&
           std::abs(state.aleph.mean() - quads.mean()) < 1e-10;
    }
    check.report("gradient/quadratic tracking mean conservation", ok);
  }

  // finite-difference oracle equivalence for every shard type
  {
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(3, 3);
    Eigen::MatrixXd prec = a * a.transpose() + 3.0 * Eigen::MatrixXd::Identity(3, 3);
    auto data = generate_gmm_data(30, 0.0, 1.0, 2.0, 7);
    auto lin = generate_linreg_data(40, 4, 0.5, 7);
    auto blobs = generate_blobs(60, 3, 1.0, 7);

    const ShardList shards = {
        gaussian_shard(Eigen::VectorXd::Ones(3), prec, 0.7),
        gmm_shard(data, 10.0, 1.0, 2.0, 1.0),
        linreg_shard(lin.X, lin.y, 1.0, 1.0, 0.5),
        logreg_shard(blobs.X, blobs.labels, 3, 10.0, 0.5),
        mlp_shard(blobs.X, blobs.labels, 4, 3, 10.0, 0.5),
    };
    const std::vector<std::string> names = {"gaussian", "gmm", "linreg", "logreg", "mlp"};
    for (size_t s = 0; s < shards.size(); ++s) {
      const auto& shard = *shards[s];
      bool grad_ok = true, hvp_ok = true;
      const double hvp_tol = names[s] == "mlp" ? 1e-3 : 1e-5;
      for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd w(shard.dim()), v(shard.dim());
        for (int j = 0; j < shard.dim(); ++j) w[j] = 0.3 * normal(eng), v[j] = normal(eng);
        grad_ok = grad_ok && rel_err(shard.grad(w), fd_gradient(shard, w)) < 1e-4;
        if (names[s] != "mlp")  // mlp hvp is itself finite-difference based
          hvp_ok = hvp_ok && rel_err(shard.hvp(w, v), fd_hvp(shard, w, v)) < hvp_tol;
        // hvp symmetry: v' H u == u' H v
        Eigen::VectorXd u(shard.dim());
        for (int j = 0; j < shard.dim(); ++j) u[j] = normal(eng);
        const double sym = std::abs(v.dot(shard.hvp(w, u)) - u.dot(shard.hvp(w, v)));
        hvp_ok = hvp_ok && sym < (names[s] == "mlp" ? 1e-4 * (1 + u.norm() * v.norm()) : 1e-8);
      }
      check.report(names[s] + " shard gradient matches finite differences", grad_ok);
      check.report(names[s] + " shard hvp oracle/symmetry", hvp_ok);
    }
  }

  out << (check.failures == 0 ? "validation passed\n"
                              : "validation FAILED\n");
  return check.failures;
}

}  // namespace dmhmc
