#pragma once

#include <Eigen/Core>

namespace lgr {

/// Flattened N x k x D feature tensor: row (i*k + j) holds the D-wide feature
/// of point i's j-th neighbor. This is the layout the per-point MLPs consume.
struct FeatureRows {
  int n = 0;
  int k = 0;
  Eigen::MatrixXd rows;  // (n*k) x D

  bool empty() const { return rows.size() == 0; }
  int width() const { return static_cast<int>(rows.cols()); }
};

}  // namespace lgr
