#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dmhmc/datasets.hpp"
#include "dmhmc/diagnostics.hpp"
#include "dmhmc/potentials.hpp"

using namespace dmhmc;

namespace {

std::mt19937_64 g_eng(2718);

Eigen::VectorXd random_vec(int d, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = normal(g_eng);
  return v;
}

Eigen::MatrixXd random_spd(int d) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(d, d);
  return a * a.transpose() + d * Eigen::MatrixXd::Identity(d, d);
}

double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  return (got - want).norm() / std::max(1e-12, want.norm());
}

}  // namespace

TEST_CASE("gaussian shard gradient vanishes at the mode") {
  auto s = gaussian_shard(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3), 1.0);
  CHECK(s->grad(Eigen::VectorXd::Zero(3)).norm() == doctest::Approx(0.0));
}

TEST_CASE("gaussian shard hvp arithmetic") {
  auto s = gaussian_shard(Eigen::VectorXd::Zero(2),
                          0.5 * Eigen::MatrixXd::Identity(2, 2), 1.0);
  const Eigen::Vector2d v(1.0, 1.0);
  const Eigen::VectorXd h = s->hvp(Eigen::Vector2d(0.3, -0.2), v);
  CHECK(h[0] == doctest::Approx(0.5));
  CHECK(h[1] == doctest::Approx(0.5));
  CHECK(v.dot(h) == doctest::Approx(1.0));
}

TEST_CASE("gaussian shard rejects non-SPD precision") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(gaussian_shard(Eigen::VectorXd::Zero(2), bad, 1.0), NonSPDPrecision);
}

TEST_CASE("gaussian shard hvp matches finite differences of grad") {
  auto s = gaussian_shard(random_vec(4), random_spd(4), 0.8);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd w = random_vec(4), v = random_vec(4);
    CHECK(rel_err(s->hvp(w, v), fd_hvp(*s, w, v)) < 1e-5);
  }
}

TEST_CASE("gmm shard matches finite-difference oracles at random points") {
  auto data = generate_gmm_data(50, 0.0, 1.0, 2.0, 3);
  auto s = gmm_shard(data, 10.0, 1.0, 2.0, 0.2);
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd th = random_vec(2);
    CHECK(rel_err(s->grad(th), fd_gradient(*s, th)) < 1e-4);
    const Eigen::VectorXd v = random_vec(2);
    CHECK(rel_err(s->hvp(th, v), fd_hvp(*s, th, v)) < 1e-4);
  }
}

TEST_CASE("gmm shard far second mode reduces to single component plus prior") {
  // one datum exactly at theta1 with theta2 huge: the second component is
  // negligible, so grad in theta1 is the prior term alone
  auto s = gmm_shard({0.0}, 10.0, 1.0, 2.0, 1.0);
  const Eigen::Vector2d th(0.0, 50.0);
  const Eigen::VectorXd g = s->grad(th);
  CHECK(g[0] == doctest::Approx(-0.0 / 10.0).epsilon(1e-9));
  // theta2 gradient: prior pulls the huge offset back
  CHECK(g[1] == doctest::Approx(-50.0 / 1.0).epsilon(1e-6));
}

TEST_CASE("linreg shard: zero design gives prior-only posterior") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(10, 3);
  auto s = linreg_shard(X, Eigen::VectorXd::Zero(10), 1.0, 2.0, 1.0);
  CHECK(s->grad(Eigen::VectorXd::Zero(3)).norm() == doctest::Approx(0.0));
  const Eigen::VectorXd w = random_vec(3);
  CHECK(rel_err(s->grad(w), Eigen::VectorXd(-2.0 * w)) < 1e-12);
}

TEST_CASE("linreg posterior mean equals the ridge solution") {
  auto data = generate_linreg_data(60, 5, 0.5, 17);
  const double noise_prec = 4.0, prior_prec = 1.0;
  auto s = linreg_shard(data.X, data.y, noise_prec, prior_prec, 1.0);
  const Eigen::MatrixXd A =
      noise_prec * data.X.transpose() * data.X +
      prior_prec * Eigen::MatrixXd::Identity(5, 5);
  const Eigen::VectorXd mode = A.ldlt().solve(noise_prec * data.X.transpose() * data.y);
  // gradient vanishes exactly at the closed-form posterior mean
  CHECK(s->grad(mode).norm() < 1e-8);
  // hvp is the constant matrix A
  const Eigen::VectorXd v = random_vec(5);
  CHECK(rel_err(s->hvp(random_vec(5), v), Eigen::VectorXd(A * v)) < 1e-12);
}

TEST_CASE("linreg shape check") {
  CHECK_THROWS_AS(linreg_shard(Eigen::MatrixXd::Zero(5, 2), Eigen::VectorXd::Zero(4),
                               1.0, 1.0, 1.0),
                  ShapeMismatch);
}

TEST_CASE("logreg shard gradient and hvp vs oracles") {
  auto blobs = generate_blobs(80, 3, 1.0, 4);
  auto s = logreg_shard(blobs.X, blobs.labels, 3, 100.0, 0.5);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd w = random_vec(s->dim(), 0.3);
    CHECK(rel_err(s->grad(w), fd_gradient(*s, w)) < 1e-4);
    const Eigen::VectorXd v = random_vec(s->dim());
    CHECK(rel_err(s->hvp(w, v), fd_hvp(*s, w, v)) < 1e-5);
  }
}

TEST_CASE("logreg at zero weights on balanced binary data") {
  // grad of the likelihood part at omega=0 has the standard X'(y - 1/2) form
  Eigen::MatrixXd X(4, 2);
  X << 1, 0.5, -1, 0.25, 2, -0.5, -2, 1.0;
  Eigen::VectorXi y(4);
  y << 1, 0, 1, 0;
  auto s = logreg_shard(X, y, 2, 0.0, 1.0);
  Eigen::MatrixXd resid(4, 2);  // one-hot minus uniform softmax
  for (int i = 0; i < 4; ++i)
    for (int c = 0; c < 2; ++c) resid(i, c) = (y[i] == c ? 1.0 : 0.0) - 0.5;
  const Eigen::MatrixXd gw = resid.transpose() * X;
  const Eigen::VectorXd g = s->grad(Eigen::VectorXd::Zero(4));
  CHECK(g[0] == doctest::Approx(gw(0, 0)));
  CHECK(g[3] == doctest::Approx(gw(1, 1)));
}

TEST_CASE("logreg rejects labels out of range") {
  Eigen::VectorXi bad(2);
  bad << 0, 3;
  CHECK_THROWS_AS(logreg_shard(Eigen::MatrixXd::Zero(2, 2), bad, 2, 1.0, 1.0),
                  LabelOutOfRange);
}

TEST_CASE("mlp at zero weights gives uniform softmax likelihood") {
  auto blobs = generate_blobs(40, 4, 1.0, 6);
  auto s = mlp_shard(blobs.X, blobs.labels, 5, 4, 0.0, 1.0);
  CHECK(s->log_density(Eigen::VectorXd::Zero(s->dim())) ==
        doctest::Approx(40.0 * std::log(0.25)));
}

TEST_CASE("mlp gradient matches finite differences; hvp symmetric and linear") {
  auto blobs = generate_blobs(30, 2, 1.0, 8);
  auto s = mlp_shard(blobs.X, blobs.labels, 4, 2, 10.0, 0.5);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd w = random_vec(s->dim(), 0.3);
    CHECK(rel_err(s->grad(w), fd_gradient(*s, w)) < 1e-4);
    const Eigen::VectorXd u = random_vec(s->dim()), v = random_vec(s->dim());
    // symmetry
    CHECK(std::abs(v.dot(s->hvp(w, u)) - u.dot(s->hvp(w, v))) <
          1e-4 * (1.0 + u.norm() * v.norm()));
    // linearity in the direction
    CHECK(rel_err(s->hvp(w, 2.0 * u), Eigen::VectorXd(2.0 * s->hvp(w, u))) < 1e-4);
  }
}

TEST_CASE("convex shards have nonnegative hvp quadratic form") {
  auto lin = generate_linreg_data(40, 4, 0.5, 10);
  auto blobs = generate_blobs(50, 3, 1.0, 10);
  const ShardList convex = {
      gaussian_shard(Eigen::VectorXd::Zero(4), random_spd(4), 1.0),
      linreg_shard(lin.X, lin.y, 1.0, 1.0, 0.5),
      logreg_shard(blobs.X, blobs.labels, 3, 1.0, 0.5),
  };
  for (const auto& s : convex)
    for (int t = 0; t < 10; ++t) {
      const Eigen::VectorXd w = random_vec(s->dim()), v = random_vec(s->dim());
      CHECK(v.dot(s->hvp(w, v)) >= -1e-10);
    }
}

TEST_CASE("sum decomposition: shards reconstruct the centralized posterior") {
  const int m = 4;
  SUBCASE("gmm by sample") {
    auto data = generate_gmm_data(40, 0.0, 1.0, 2.0, 9);
    ShardList shards;
    for (int i = 0; i < m; ++i) {
      std::vector<double> part(data.begin() + i * 10, data.begin() + (i + 1) * 10);
      shards.push_back(gmm_shard(part, 10.0, 1.0, 2.0, 1.0 / m));
    }
    auto full = gmm_shard(data, 10.0, 1.0, 2.0, 1.0);
    for (int t = 0; t < 10; ++t) {
      const Eigen::VectorXd th = random_vec(2);
      double sum = 0.0;
      for (const auto& s : shards) sum += s->log_density(th);
      CHECK(sum == doctest::Approx(full->log_density(th)).epsilon(1e-8));
    }
  }
  SUBCASE("linreg by feature and by sample") {
    auto data = generate_linreg_data(40, 6, 0.5, 9);
    for (auto mode : {PartitionMode::by_sample, PartitionMode::by_feature}) {
      auto part = partition(data, m, mode);
      ShardList shards;
      for (const auto& sd : part.shards)
        shards.push_back(linreg_shard(sd.X, sd.y, 1.0, 2.0, 1.0 / m));
      // centralized target of the same shard-defined model
      Eigen::MatrixXd stacked_X(40 * m, 6);
      Eigen::VectorXd stacked_y(40 * m);
      if (mode == PartitionMode::by_sample) {
        stacked_X.resize(40, 6);
        stacked_y.resize(40);
        stacked_X = data.X;
        stacked_y = data.y;
      } else {
        for (int i = 0; i < m; ++i) {
          stacked_X.middleRows(40 * i, 40) = part.shards[i].X;
          stacked_y.segment(40 * i, 40) = part.shards[i].y;
        }
      }
      auto full = linreg_shard(stacked_X, stacked_y, 1.0, 2.0, 1.0);
      for (int t = 0; t < 5; ++t) {
        const Eigen::VectorXd w = random_vec(6);
        double sum = 0.0;
        for (const auto& s : shards) sum += s->log_density(w);
        CHECK(sum == doctest::Approx(full->log_density(w)).epsilon(1e-8));
      }
    }
  }
  SUBCASE("logreg by class") {
    auto blobs = generate_blobs(60, 3, 1.0, 9);
    auto part = partition(blobs, 3, PartitionMode::by_class);
    ShardList shards;
    for (const auto& sd : part.shards)
      shards.push_back(logreg_shard(sd.X, sd.labels, 3, 10.0, 1.0 / 3.0));
    auto full = logreg_shard(blobs.X, blobs.labels, 3, 10.0, 1.0);
    for (int t = 0; t < 5; ++t) {
      const Eigen::VectorXd w = random_vec(shards[0]->dim(), 0.3);
      double sum = 0.0;
      for (const auto& s : shards) sum += s->log_density(w);
      CHECK(sum == doctest::Approx(full->log_density(w)).epsilon(1e-8));
    }
  }
}

TEST_CASE("partition shapes and errors") {
  auto data = generate_linreg_data(26, 13, 0.5, 2);

  SUBCASE("by_feature 13 over 4: three agents get 3, the last gets 4") {
    auto part = partition(data, 4, PartitionMode::by_feature);
    auto nonzero_cols = [](const Eigen::MatrixXd& X) {
      int c = 0;
      for (Eigen::Index j = 0; j < X.cols(); ++j)
        if (X.col(j).norm() > 0) ++c;
      return c;
    };
    CHECK(nonzero_cols(part.shards[0].X) == 3);
    CHECK(nonzero_cols(part.shards[1].X) == 3);
    CHECK(nonzero_cols(part.shards[2].X) == 3);
    CHECK(nonzero_cols(part.shards[3].X) == 4);
    // full parameter dimension retained
    CHECK(part.shards[0].X.cols() == 13);
  }

  SUBCASE("m=1 keeps the dataset intact") {
    auto part = partition(data, 1, PartitionMode::by_sample);
    CHECK(part.shards.size() == 1);
    CHECK((part.shards[0].X - data.X).norm() == doctest::Approx(0.0));
  }

  SUBCASE("by_class 10 classes over 5 agents: agent 0 gets classes {0,1}") {
    Dataset d10;
    d10.X = Eigen::MatrixXd::Random(50, 2);
    d10.labels.resize(50);
    d10.y.resize(50);
    for (int i = 0; i < 50; ++i) d10.labels[i] = i / 5, d10.y[i] = i / 5;
    auto part = partition(d10, 5, PartitionMode::by_class);
    CHECK(part.shards[0].labels.minCoeff() == 0);
    CHECK(part.shards[0].labels.maxCoeff() == 1);
    CHECK(part.shards[4].labels.minCoeff() == 8);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(partition(data, 20, PartitionMode::by_feature), InsufficientFeatures);
    Dataset tiny;
    tiny.X = Eigen::MatrixXd::Zero(2, 2);
    tiny.y = Eigen::VectorXd::Zero(2);
    tiny.labels = Eigen::VectorXi::Zero(2);
    CHECK_THROWS_AS(partition(tiny, 3, PartitionMode::by_class), InsufficientClasses);
  }
}
