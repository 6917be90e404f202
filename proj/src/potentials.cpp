#include "dmhmc/potentials.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <iostream>
#include <numbers>

namespace dmhmc {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double log_normal(double x, double var) {
  return -0.5 * (kLog2Pi + std::log(var) + x * x / var);
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd p = (z.colwise() - z.rowwise().maxCoeff()).array().exp();
  return p.array().colwise() / p.rowwise().sum().array();
}

Eigen::VectorXd logsumexp_rows(const Eigen::MatrixXd& z) {
  Eigen::VectorXd m = z.rowwise().maxCoeff();
  return m.array() +
         (z.colwise() - m).array().exp().rowwise().sum().log();
}

class GaussianShard final : public PotentialShard {
 public:
  GaussianShard(Eigen::VectorXd mean, Eigen::MatrixXd precision, double scale)
      : mean_(std::move(mean)), precision_(std::move(precision)), scale_(scale) {
    if (precision_.rows() != precision_.cols() ||
        precision_.rows() != mean_.size())
      throw ShapeMismatch("precision/mean dimensions disagree");
    Eigen::LLT<Eigen::MatrixXd> llt(precision_);
    if (llt.info() != Eigen::Success)
      throw NonSPDPrecision("precision matrix is not SPD");
  }

  int dim() const override { return static_cast<int>(mean_.size()); }

  double log_density(const Eigen::VectorXd& w) const override {
    Eigen::VectorXd r = w - mean_;
    return -0.5 * scale_ * r.dot(precision_ * r);
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& w) const override {
    return -scale_ * (precision_ * (w - mean_));
  }

  Eigen::VectorXd hvp(const Eigen::VectorXd&, const Eigen::VectorXd& v) const override {
    return scale_ * (precision_ * v);
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd precision_;
  double scale_;
};

class GmmShard final : public PotentialShard {
 public:
  GmmShard(std::vector<double> data, double s1, double s2, double sx, double share)
      : data_(std::move(data)), s1_(s1), s2_(s2), sx_(sx), share_(share) {
    if (s1 <= 0 || s2 <= 0 || sx <= 0) throw Error("variances must be positive");
    if (share <= 0 || share > 1) throw Error("prior_share must be in (0,1]");
    if (data_.empty())
      std::cerr << "warning: gmm shard has no data; shard is prior-only\n";
  }

  int dim() const override { return 2; }

  double log_density(const Eigen::VectorXd& th) const override {
    double ll = share_ * (log_normal(th[0], s1_) + log_normal(th[1], s2_));
    for (double x : data_) ll += mixture_log(th, x);
    return ll;
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& th) const override {
    Eigen::Vector2d g(-share_ * th[0] / s1_, -share_ * th[1] / s2_);
    for (double x : data_) {
      auto [wa, wb, ra, rb] = responsibilities(th, x);
      g[0] += wa * ra + wb * rb;
      g[1] += wb * rb;
    }
    return g;
  }

  Eigen::VectorXd hvp(const Eigen::VectorXd& th, const Eigen::VectorXd& v) const override {
    // Hessian of log_density, then negated.
    Eigen::Matrix2d h;
    h << -share_ / s1_, 0.0, 0.0, -share_ / s2_;
    for (double x : data_) {
      auto [wa, wb, ra, rb] = responsibilities(th, x);
      const double qa = wa * (ra * ra - 1.0 / sx_);
      const double qb = wb * (rb * rb - 1.0 / sx_);
      const double g1 = wa * ra + wb * rb;
      const double g2 = wb * rb;
      h(0, 0) += (qa + qb) - g1 * g1;
      h(0, 1) += qb - g1 * g2;
      h(1, 1) += qb - g2 * g2;
    }
    h(1, 0) = h(0, 1);
    return -(h * v);
  }

 private:
  double mixture_log(const Eigen::VectorXd& th, double x) const {
    const double la = -0.5 * (x - th[0]) * (x - th[0]) / sx_;
    const double lb = -0.5 * (x - th[0] - th[1]) * (x - th[0] - th[1]) / sx_;
    const double m = std::max(la, lb);
    return m + std::log(0.5 * (std::exp(la - m) + std::exp(lb - m))) -
           0.5 * (kLog2Pi + std::log(sx_));
  }

  // component weights a/(a+b), b/(a+b) and standardized residuals
  std::array<double, 4> responsibilities(const Eigen::VectorXd& th, double x) const {
    const double ra = (x - th[0]) / sx_;
    const double rb = (x - th[0] - th[1]) / sx_;
    const double la = -0.5 * ra * ra * sx_;
    const double lb = -0.5 * rb * rb * sx_;
    const double m = std::max(la, lb);
    const double ea = std::exp(la - m), eb = std::exp(lb - m);
    return {ea / (ea + eb), eb / (ea + eb), ra, rb};
  }

  std::vector<double> data_;
  double s1_, s2_, sx_, share_;
};

class LinRegShard final : public PotentialShard {
 public:
  LinRegShard(Eigen::MatrixXd X, Eigen::VectorXd y, double noise_prec,
              double prior_prec, double share)
      : X_(std::move(X)), y_(std::move(y)), noise_prec_(noise_prec),
        ridge_(share * prior_prec) {
    if (X_.rows() != y_.size()) throw ShapeMismatch("X rows must match y length");
    xtx_ = X_.transpose() * X_;
    xty_ = X_.transpose() * y_;
  }

  int dim() const override { return static_cast<int>(X_.cols()); }

  double log_density(const Eigen::VectorXd& w) const override {
    const double rss = (y_ - X_ * w).squaredNorm();
    return -0.5 * noise_prec_ * rss - 0.5 * ridge_ * w.squaredNorm();
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& w) const override {
    return noise_prec_ * (xty_ - xtx_ * w) - ridge_ * w;
  }

  Eigen::VectorXd hvp(const Eigen::VectorXd&, const Eigen::VectorXd& v) const override {
    return noise_prec_ * (xtx_ * v) + ridge_ * v;
  }

 private:
  Eigen::MatrixXd X_, xtx_;
  Eigen::VectorXd y_, xty_;
  double noise_prec_, ridge_;
};

class LogRegShard final : public PotentialShard {
 public:
  LogRegShard(Eigen::MatrixXd X, Eigen::VectorXi labels, int n_classes,
              double prior_prec, double share)
      : X_(std::move(X)), labels_(std::move(labels)), c_(n_classes),
        ridge_(share * prior_prec) {
    if (X_.rows() != labels_.size()) throw ShapeMismatch("X rows must match labels");
    for (int i = 0; i < labels_.size(); ++i)
      if (labels_[i] < 0 || labels_[i] >= c_)
        throw LabelOutOfRange("label out of [0, n_classes)");
  }

  int dim() const override { return c_ * static_cast<int>(X_.cols()); }

  double log_density(const Eigen::VectorXd& omega) const override {
    const Eigen::MatrixXd z = X_ * unflatten(omega).transpose();
    const Eigen::VectorXd lse = logsumexp_rows(z);
    double ll = -0.5 * ridge_ * omega.squaredNorm();
    for (int i = 0; i < labels_.size(); ++i) ll += z(i, labels_[i]) - lse[i];
    return ll;
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& omega) const override {
    const Eigen::MatrixXd z = X_ * unflatten(omega).transpose();
    Eigen::MatrixXd r = -softmax_rows(z);  // n x c
    for (int i = 0; i < labels_.size(); ++i) r(i, labels_[i]) += 1.0;
    Eigen::MatrixXd gw = r.transpose() * X_;  // c x f
    return flatten(gw) - ridge_ * omega;
  }

  Eigen::VectorXd hvp(const Eigen::VectorXd& omega, const Eigen::VectorXd& v) const override {
    const Eigen::MatrixXd p = softmax_rows(X_ * unflatten(omega).transpose());
    const Eigen::MatrixXd u = X_ * unflatten(v).transpose();  // n x c
    const Eigen::VectorXd pu = (p.array() * u.array()).rowwise().sum();
    Eigen::MatrixXd a = (p.array() * u.array()).matrix();
    a.array() -= p.array().colwise() * pu.array();
    return flatten(a.transpose() * X_) + ridge_ * v;
  }

 private:
  Eigen::MatrixXd unflatten(const Eigen::VectorXd& omega) const {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    return Eigen::Map<const RowMajor>(omega.data(), c_, X_.cols());
  }
  Eigen::VectorXd flatten(const Eigen::MatrixXd& w) const {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor r = w;
    return Eigen::Map<const Eigen::VectorXd>(r.data(), r.size());
  }

  Eigen::MatrixXd X_;
  Eigen::VectorXi labels_;
  int c_;
  double ridge_;
};

class MlpShard final : public PotentialShard {
 public:
  MlpShard(Eigen::MatrixXd X, Eigen::VectorXi labels, int hidden, int n_classes,
           double prior_prec, double share)
      : X_(std::move(X)), labels_(std::move(labels)), h_(hidden), c_(n_classes),
        ridge_(share * prior_prec) {
    if (X_.rows() != labels_.size()) throw ShapeMismatch("X rows must match labels");
    for (int i = 0; i < labels_.size(); ++i)
      if (labels_[i] < 0 || labels_[i] >= c_)
        throw LabelOutOfRange("label out of [0, n_classes)");
    f_ = static_cast<int>(X_.cols());
  }

  int dim() const override { return mlp_param_count(f_, h_, c_); }

  double log_density(const Eigen::VectorXd& omega) const override {
    auto [w1, b1, w2, b2] = unpack(omega);
    const Eigen::MatrixXd hidden =
        ((X_ * w1.transpose()).rowwise() + b1.transpose()).array().tanh();
    const Eigen::MatrixXd z = (hidden * w2.transpose()).rowwise() + b2.transpose();
    const Eigen::VectorXd lse = logsumexp_rows(z);
    double ll = -0.5 * ridge_ * omega.squaredNorm();
    for (int i = 0; i < labels_.size(); ++i) ll += z(i, labels_[i]) - lse[i];
    return ll;
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& omega) const override {
    auto [w1, b1, w2, b2] = unpack(omega);
    const Eigen::MatrixXd hidden =
        ((X_ * w1.transpose()).rowwise() + b1.transpose()).array().tanh();
    const Eigen::MatrixXd z = (hidden * w2.transpose()).rowwise() + b2.transpose();
    Eigen::MatrixXd dz = -softmax_rows(z);  // n x c
    for (int i = 0; i < labels_.size(); ++i) dz(i, labels_[i]) += 1.0;
    const Eigen::MatrixXd dw2 = dz.transpose() * hidden;
    const Eigen::VectorXd db2 = dz.colwise().sum();
    const Eigen::MatrixXd da =
        (dz * w2).array() * (1.0 - hidden.array().square());
    const Eigen::MatrixXd dw1 = da.transpose() * X_;
    const Eigen::VectorXd db1 = da.colwise().sum();
    return pack(dw1, db1, dw2, db2) - ridge_ * omega;
  }

  // Central differences of the exact gradient; step scaled to the operand
  // magnitudes. hvp of U, so the differenced gradient is negated.
  Eigen::VectorXd hvp(const Eigen::VectorXd& omega, const Eigen::VectorXd& v) const override {
    const double h = 1e-4 * (1.0 + omega.norm()) / (1.0 + v.norm());
    const Eigen::VectorXd gp = grad(omega + h * v);
    const Eigen::VectorXd gm = grad(omega - h * v);
    return -(gp - gm) / (2.0 * h);
  }

 private:
  using Unpacked = std::tuple<Eigen::MatrixXd, Eigen::VectorXd, Eigen::MatrixXd, Eigen::VectorXd>;

  Unpacked unpack(const Eigen::VectorXd& omega) const {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const double* p = omega.data();
    Eigen::MatrixXd w1 = Eigen::Map<const RowMajor>(p, h_, f_);
    p += h_ * f_;
    Eigen::VectorXd b1 = Eigen::Map<const Eigen::VectorXd>(p, h_);
    p += h_;
    Eigen::MatrixXd w2 = Eigen::Map<const RowMajor>(p, c_, h_);
    p += c_ * h_;
    Eigen::VectorXd b2 = Eigen::Map<const Eigen::VectorXd>(p, c_);
    return {w1, b1, w2, b2};
  }

  Eigen::VectorXd pack(const Eigen::MatrixXd& w1, const Eigen::VectorXd& b1,
                       const Eigen::MatrixXd& w2, const Eigen::VectorXd& b2) const {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::VectorXd out(dim());
    double* p = out.data();
    RowMajor t1 = w1;
    std::copy(t1.data(), t1.data() + t1.size(), p);
    p += t1.size();
    std::copy(b1.data(), b1.data() + b1.size(), p);
    p += b1.size();
    RowMajor t2 = w2;
    std::copy(t2.data(), t2.data() + t2.size(), p);
    p += t2.size();
    std::copy(b2.data(), b2.data() + b2.size(), p);
    return out;
  }

  Eigen::MatrixXd X_;
  Eigen::VectorXi labels_;
  int h_, c_, f_;
  double ridge_;
};

}  // namespace

ShardPtr gaussian_shard(const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& precision, double scale) {
  return std::make_shared<GaussianShard>(mean, precision, scale);
}

ShardPtr gmm_shard(const std::vector<double>& data, double sigma1_sq,
                   double sigma2_sq, double sigmax_sq, double prior_share) {
  return std::make_shared<GmmShard>(data, sigma1_sq, sigma2_sq, sigmax_sq, prior_share);
}

ShardPtr linreg_shard(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      double noise_precision, double prior_precision,
                      double prior_share) {
  return std::make_shared<LinRegShard>(X, y, noise_precision, prior_precision, prior_share);
}

ShardPtr logreg_shard(const Eigen::MatrixXd& X, const Eigen::VectorXi& labels,
                      int n_classes, double prior_precision, double prior_share) {
  return std::make_shared<LogRegShard>(X, labels, n_classes, prior_precision, prior_share);
}

ShardPtr mlp_shard(const Eigen::MatrixXd& X, const Eigen::VectorXi& labels,
                   int hidden, int n_classes, double prior_precision,
                   double prior_share) {
  return std::make_shared<MlpShard>(X, labels, hidden, n_classes, prior_precision, prior_share);
}

int mlp_param_count(int n_features, int hidden, int n_classes) {
  return hidden * n_features + hidden + n_classes * hidden + n_classes;
}

Eigen::MatrixXd logreg_predict_proba(const Eigen::VectorXd& omega,
                                     const Eigen::MatrixXd& X, int n_classes) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto w = Eigen::Map<const RowMajor>(omega.data(), n_classes, X.cols());
  return softmax_rows(X * w.transpose());
}

Eigen::MatrixXd mlp_predict_proba(const Eigen::VectorXd& omega,
                                  const Eigen::MatrixXd& X, int hidden,
                                  int n_classes) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int f = static_cast<int>(X.cols());
  const double* p = omega.data();
  const auto w1 = Eigen::Map<const RowMajor>(p, hidden, f);
  p += hidden * f;
  const auto b1 = Eigen::Map<const Eigen::VectorXd>(p, hidden);
  p += hidden;
  const auto w2 = Eigen::Map<const RowMajor>(p, n_classes, hidden);
  p += n_classes * hidden;
  const auto b2 = Eigen::Map<const Eigen::VectorXd>(p, n_classes);
  const Eigen::MatrixXd h = ((X * w1.transpose()).rowwise() + b1.transpose()).array().tanh();
  return softmax_rows((h * w2.transpose()).rowwise() + b2.transpose());
}

}  // namespace dmhmc
