#include "dmhmc/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dmhmc/rng.hpp"

namespace dmhmc {

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("non-numeric cell in " + path + ": '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("ragged CSV row in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2)
    throw ParseError(path + ": need at least one feature column and a label column");

  Dataset d;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index f = static_cast<Eigen::Index>(rows.front().size()) - 1;
  d.X.resize(n, f);
  d.y.resize(n);
  d.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < f; ++j) d.X(i, j) = rows[i][j];
    d.y[i] = rows[i][f];
    d.labels[i] = static_cast<int>(std::lround(rows[i][f]));
  }
  return d;
}

namespace {

Dataset take_rows(const Dataset& data, const std::vector<int>& idx) {
  Dataset s;
  s.X.resize(static_cast<Eigen::Index>(idx.size()), data.X.cols());
  s.y.resize(static_cast<Eigen::Index>(idx.size()));
  s.labels.resize(static_cast<Eigen::Index>(idx.size()));
  for (size_t k = 0; k < idx.size(); ++k) {
    s.X.row(static_cast<Eigen::Index>(k)) = data.X.row(idx[k]);
    s.y[static_cast<Eigen::Index>(k)] = data.y[idx[k]];
    s.labels[static_cast<Eigen::Index>(k)] = data.labels[idx[k]];
  }
  return s;
}

// split n items into m near-equal contiguous blocks; the remainder goes to
// the last blocks so early agents get the smaller share (13 over 4 -> 3,3,3,4)
std::vector<std::pair<int, int>> blocks(int n, int m) {
  std::vector<std::pair<int, int>> out;
  const int base = n / m, rem = n % m;
  int start = 0;
  for (int i = 0; i < m; ++i) {
    const int len = base + (i >= m - rem ? 1 : 0);
    out.emplace_back(start, len);
    start += len;
  }
  return out;
}

}  // namespace

DatasetPartition partition(const Dataset& data, int m, PartitionMode mode) {
  if (m < 1) throw Error("agent count must be positive");
  DatasetPartition out;
  out.mode = mode;
  const int n = static_cast<int>(data.n());

  switch (mode) {
    case PartitionMode::by_sample: {
      for (auto [start, len] : blocks(n, m)) {
        std::vector<int> idx(len);
        std::iota(idx.begin(), idx.end(), start);
        out.shards.push_back(take_rows(data, idx));
      }
      break;
    }
    case PartitionMode::by_class: {
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return data.labels[a] < data.labels[b];
      });
      if (n < m)
        throw InsufficientClasses("fewer samples than agents for by_class split");
      for (auto [start, len] : blocks(n, m)) {
        std::vector<int> idx(order.begin() + start, order.begin() + start + len);
        out.shards.push_back(take_rows(data, idx));
      }
      break;
    }
    case PartitionMode::by_feature: {
      const int f = static_cast<int>(data.n_features());
      if (f < m)
        throw InsufficientFeatures("fewer features than agents for by_feature split");
      for (auto [start, len] : blocks(f, m)) {
        Dataset s = data;
        for (int j = 0; j < f; ++j)
          if (j < start || j >= start + len) s.X.col(j).setZero();
        out.shards.push_back(std::move(s));
      }
      break;
    }
  }
  return out;
}

std::vector<double> generate_gmm_data(int n, double theta1, double theta2,
                                      double sigmax_sq, std::uint64_t seed) {
  auto eng = substream(seed, RngStream::data, 0, 0);
  std::normal_distribution<double> normal(0.0, std::sqrt(sigmax_sq));
  std::bernoulli_distribution coin(0.5);
  std::vector<double> xs(n);
  for (auto& x : xs) x = (coin(eng) ? theta1 : theta1 + theta2) + normal(eng);
  return xs;
}

Dataset generate_linreg_data(int n, int d, double noise_sd, std::uint64_t seed) {
  auto eng = substream(seed, RngStream::data, 0, 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset out;
  out.X.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out.X(i, j) = normal(eng);
  Eigen::VectorXd w_true(d);
  for (Eigen::Index j = 0; j < d; ++j) w_true[j] = normal(eng);
  out.y = out.X * w_true;
  for (Eigen::Index i = 0; i < n; ++i) out.y[i] += noise_sd * normal(eng);
  out.labels = Eigen::VectorXi::Zero(n);
  return out;
}

Dataset generate_blobs(int n, int n_classes, double spread, std::uint64_t seed) {
  auto eng = substream(seed, RngStream::data, 0, 2);
  std::normal_distribution<double> normal(0.0, spread);
  Dataset out;
  out.X.resize(n, 3);  // two coordinates plus a bias column
  out.y.resize(n);
  out.labels.resize(n);
  const double radius = 3.0;
  for (int i = 0; i < n; ++i) {
    const int c = i % n_classes;
    const double ang = 2.0 * M_PI * c / n_classes;
    out.X(i, 0) = radius * std::cos(ang) + normal(eng);
    out.X(i, 1) = radius * std::sin(ang) + normal(eng);
    out.X(i, 2) = 1.0;
    out.labels[i] = c;
    out.y[i] = c;
  }
  return out;
}

}  // namespace dmhmc
