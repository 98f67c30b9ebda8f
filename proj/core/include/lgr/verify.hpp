#pragma once

#include <cstdint>
#include <string>

#include "lgr/point_cloud.hpp"

namespace lgr {

struct InvarianceReport {
  std::string name;
  int trials = 0;
  double tol = 0.0;
  double max_diff = 0.0;
  bool pass = false;
};

/// Recomputes every pairwise distance and every angle cosine between point
/// vectors under `trials` random SO(3) rotations and reports the worst
/// deviation from the unrotated cloud.
InvarianceReport verify_pairwise_invariance(const PointCloud& cloud, int trials,
                                            double tol, std::uint64_t seed);

/// Worst elementwise deviation of project(canonical_frame(.)) coordinates
/// across rotations. Throws DegenerateSpectrum when the skeleton's singular
/// values are separated by less than 5e-3 * sigma1 (axis directions would be
/// meaningless).
InvarianceReport verify_svd_invariance(const PointCloud& cloud, int trials, int m,
                                       double tol, std::uint64_t seed);

/// Worst elementwise deviation of the local k x 8 features and of the edge
/// features computed through the full canonical pipeline, across rotations.
/// The cloud must carry normals.
InvarianceReport verify_feature_invariance(const PointCloud& cloud, int trials,
                                           double tol, std::uint64_t seed, int k = 32,
                                           int m = 32);

}  // namespace lgr
