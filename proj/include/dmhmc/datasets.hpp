#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dmhmc/errors.hpp"

namespace dmhmc {

/// Feature/label dataset. labels holds the last CSV column; for regression
/// targets use labels_real instead.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;       // regression target (last column, as real)
  Eigen::VectorXi labels;  // classification labels (last column, rounded)

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index n_features() const { return X.cols(); }
};

enum class PartitionMode { by_sample, by_class, by_feature };

struct DatasetPartition {
  std::vector<Dataset> shards;
  PartitionMode mode = PartitionMode::by_sample;
};

/// Headerless CSV: feature columns, then the label/target as the last column.
Dataset load_csv(const std::string& path);

/// by_sample: near-equal contiguous row split.
/// by_class: rows sorted by label, then near-equal contiguous split, so each
///           agent sees a contiguous block of label values (whole classes when
///           class counts divide evenly).
/// by_feature: every agent keeps all rows and its own feature columns; the
///             remaining columns are zeroed so all agents share one parameter
///             space.
DatasetPartition partition(const Dataset& data, int m, PartitionMode mode);

// synthetic generators (seeded independently of the sampler streams)
std::vector<double> generate_gmm_data(int n, double theta1, double theta2,
                                      double sigmax_sq, std::uint64_t seed);
Dataset generate_linreg_data(int n, int d, double noise_sd, std::uint64_t seed);
/// Gaussian blobs on a circle, one blob per class, bias column appended.
Dataset generate_blobs(int n, int n_classes, double spread, std::uint64_t seed);

}  // namespace dmhmc
