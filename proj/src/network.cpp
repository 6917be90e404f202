#include "dmhmc/network.hpp"

#include <Eigen/Eigenvalues>
#include <vector>

namespace dmhmc {

Graph::Graph(int m, std::initializer_list<std::pair<int, int>> e) : m(m) {
  for (auto [i, j] : e) add_edge(i, j);
}

void Graph::add_edge(int i, int j) {
  if (i == j) throw Error("self-loops are not edges");
  if (i < 0 || j < 0 || i >= m || j >= m) throw Error("edge endpoint out of range");
  edges.insert({std::min(i, j), std::max(i, j)});
}

bool Graph::has_edge(int i, int j) const {
  return edges.count({std::min(i, j), std::max(i, j)}) > 0;
}

int Graph::degree(int i) const {
  int d = 0;
  for (const auto& [a, b] : edges)
    if (a == i || b == i) ++d;
  return d;
}

bool Graph::connected() const {
  if (m <= 0) return false;
  if (m == 1) return true;
  std::vector<char> seen(m, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (const auto& [a, b] : edges) {
      int other = (a == v) ? b : (b == v ? a : -1);
      if (other >= 0 && !seen[other]) {
        seen[other] = 1;
        ++count;
        stack.push_back(other);
      }
    }
  }
  return count == m;
}

bool Graph::complete() const {
  return static_cast<int>(edges.size()) == m * (m - 1) / 2;
}

Graph Graph::complete_graph(int m) {
  Graph g;
  g.m = m;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) g.add_edge(i, j);
  return g;
}

Graph Graph::ring(int m) {
  Graph g;
  g.m = m;
  for (int i = 0; i < m; ++i) g.add_edge(i, (i + 1) % m);
  return g;
}

Graph Graph::path(int m) {
  Graph g;
  g.m = m;
  for (int i = 0; i + 1 < m; ++i) g.add_edge(i, i + 1);
  return g;
}

MixingMatrix build_mixing_matrix(const Graph& graph, MixingScheme scheme) {
  if (!graph.connected()) throw DisconnectedGraph("graph is not connected");
  const int m = graph.m;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);

  switch (scheme) {
    case MixingScheme::uniform_complete: {
      if (!graph.complete())
        throw SchemeGraphMismatch("uniform_complete requires the complete graph");
      w.setConstant(1.0 / m);
      break;
    }
    case MixingScheme::lazy_uniform: {
      int dmax = 0;
      for (int i = 0; i < m; ++i) dmax = std::max(dmax, graph.degree(i));
      const double a = 1.0 / (dmax + 1);
      for (const auto& [i, j] : graph.edges) {
        w(i, j) = a;
        w(j, i) = a;
      }
      for (int i = 0; i < m; ++i) w(i, i) = 1.0 - graph.degree(i) * a;
      break;
    }
    case MixingScheme::metropolis_hastings_weights: {
      for (const auto& [i, j] : graph.edges) {
        const double a = 1.0 / (1.0 + std::max(graph.degree(i), graph.degree(j)));
        w(i, j) = a;
        w(j, i) = a;
      }
      for (int i = 0; i < m; ++i) w(i, i) = 1.0 - w.row(i).sum();
      break;
    }
  }

  MixingMatrix out;
  out.weights = w;
  out.beta = spectral_gap(w);
  return out;
}

double spectral_gap(const Eigen::MatrixXd& weights) {
  if (weights.rows() != weights.cols()) throw NonSymmetric("matrix not square");
  if (!weights.isApprox(weights.transpose(), 1e-10))
    throw NonSymmetric("mixing matrix must be symmetric");
  if (weights.rows() == 1) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(weights, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();  // ascending
  const int n = static_cast<int>(ev.size());
  // largest eigenvalue is 1 (Perron); beta is the largest magnitude among the rest
  return std::max(std::abs(ev[0]), std::abs(ev[n - 2]));
}

Eigen::MatrixXd mix(const MixingMatrix& w, const Eigen::MatrixXd& stacked, int rounds) {
  if (rounds < 1) throw Error("rounds must be >= 1");
  if (stacked.rows() != w.weights.rows())
    throw DimensionMismatch("stacked rows must match agent count");
  Eigen::MatrixXd x = stacked;
  for (int k = 0; k < rounds; ++k) x = w.weights * x;
  return x;
}

}  // namespace dmhmc
