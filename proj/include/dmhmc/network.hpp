#pragma once

#include <Eigen/Dense>
#include <set>
#include <utility>

#include "dmhmc/errors.hpp"

namespace dmhmc {

/// Undirected communication graph over m agents. Edges are stored once as
/// (min,max) pairs; self-loops are not edges.
struct Graph {
  int m = 0;
  std::set<std::pair<int, int>> edges;

  Graph() = default;
  Graph(int m, std::initializer_list<std::pair<int, int>> e);

  void add_edge(int i, int j);
  bool has_edge(int i, int j) const;
  int degree(int i) const;
  bool connected() const;
  bool complete() const;

  static Graph complete_graph(int m);
  static Graph ring(int m);
  static Graph path(int m);
};

enum class MixingScheme { uniform_complete, lazy_uniform, metropolis_hastings_weights };

/// Doubly-stochastic, symmetric gossip weights with spectral gap beta < 1.
struct MixingMatrix {
  Eigen::MatrixXd weights;
  double beta = 0.0;

  int size() const { return static_cast<int>(weights.rows()); }
};

MixingMatrix build_mixing_matrix(const Graph& graph, MixingScheme scheme);

/// Second-largest eigenvalue magnitude of a symmetric doubly-stochastic
/// matrix (dense symmetric eigensolver; m is small).
double spectral_gap(const Eigen::MatrixXd& weights);

/// Applies W^rounds to the stacked rows. Preserves column means exactly up
/// to floating point by double stochasticity.
Eigen::MatrixXd mix(const MixingMatrix& w, const Eigen::MatrixXd& stacked, int rounds);

}  // namespace dmhmc
